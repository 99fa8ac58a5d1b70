#include "tpe/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tpe {

namespace {

constexpr std::array<char, 4> kFeatureMagic{'T', 'P', 'E', '1'};
constexpr std::array<char, 4> kMatrixMagic{'T', 'P', 'E', 'W'};
constexpr std::string_view kLabelColumns[] = {"record_id", "subject", "media_id", "template_id", "split"};

void put_u32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  put_u32(os, static_cast<std::uint32_t>(v & 0xffffffffu));
  put_u32(os, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

std::uint64_t get_u64(const unsigned char* p) { return std::uint64_t(get_u32(p)) | (std::uint64_t(get_u32(p + 4)) << 32); }

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

double parse_double(std::string_view s, const std::string& file, std::size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(file, line, "invalid number '" + std::string(s) + "'");
  if (!std::isfinite(v)) throw ParseError(file, line, "non-finite value '" + std::string(s) + "'");
  return v;
}

RecordMeta parse_labels(const std::vector<std::string_view>& f, const std::string& file, std::size_t line) {
  RecordMeta m;
  m.record_id = std::string(f[0]);
  if (m.record_id.empty()) throw ParseError(file, line, "empty record_id");
  m.subject = std::string(f[1]);
  m.media_id = std::string(f[2]);
  if (!f[3].empty()) m.template_id = std::string(f[3]);
  if (!f[4].empty()) {
    m.split = parse_split(f[4]);
    if (!m.split) throw ParseError(file, line, "split must be 'train', 'test' or empty, got '" + std::string(f[4]) + "'");
  }
  return m;
}

void check_label_header(const std::vector<std::string_view>& h, const std::string& file) {
  if (h.size() < 6) throw ParseError(file, 1, "header has too few columns");
  for (std::size_t c = 0; c < 5; ++c)
    if (h[c] != kLabelColumns[c])
      throw ParseError(file, 1, "expected column '" + std::string(kLabelColumns[c]) + "', got '" + std::string(h[c]) + "'");
}

void check_label_field(std::string_view s, const char* what) {
  if (s.find_first_of(",\n\r") != std::string_view::npos)
    throw InvalidArgument(std::string(what) + " '" + std::string(s) + "' contains a delimiter");
}

void write_labels(std::ostream& os, const RecordMeta& m) {
  check_label_field(m.record_id, "record_id");
  check_label_field(m.subject, "subject");
  check_label_field(m.media_id, "media_id");
  if (m.template_id) check_label_field(*m.template_id, "template_id");
  os << m.record_id << ',' << m.subject << ',' << m.media_id << ',' << m.template_id.value_or("") << ','
     << (m.split ? to_string(*m.split) : std::string_view{});
}

Dataset load_inline(const std::vector<std::string>& lines, const std::vector<std::string_view>& header,
                    const std::string& file, bool normalize) {
  const std::size_t dim = header.size() - 5;
  for (std::size_t c = 0; c < dim; ++c)
    if (header[5 + c] != "f" + std::to_string(c))
      throw ParseError(file, 1, "expected column 'f" + std::to_string(c) + "', got '" + std::string(header[5 + c]) + "'");

  std::vector<RecordMeta> meta;
  std::vector<double> values;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty() || lines[ln] == "\r") continue;
    const auto f = split_fields(lines[ln]);
    if (f.size() != header.size())
      throw ParseError(file, ln + 1, "expected " + std::to_string(dim) + " feature values, got " +
                                         std::to_string(f.size() < 5 ? 0 : f.size() - 5));
    meta.push_back(parse_labels(f, file, ln + 1));
    for (std::size_t c = 0; c < dim; ++c) values.push_back(parse_double(f[5 + c], file, ln + 1));
  }
  RowMatrixXd feats = Eigen::Map<RowMatrixXd>(values.data(), static_cast<Index>(meta.size()), static_cast<Index>(dim));
  return Dataset(std::move(meta), std::move(feats), normalize);
}

Dataset load_indexed(const std::vector<std::string>& lines, const std::string& file, const fs::path& bin_path,
                     bool normalize) {
  const RowMatrixXd table = read_feature_binary(bin_path);
  std::vector<RecordMeta> meta;
  std::vector<Index> rows;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty() || lines[ln] == "\r") continue;
    const auto f = split_fields(lines[ln]);
    if (f.size() != 6) throw ParseError(file, ln + 1, "expected 6 columns, got " + std::to_string(f.size()));
    meta.push_back(parse_labels(f, file, ln + 1));
    std::uint64_t row = 0;
    auto [ptr, ec] = std::from_chars(f[5].data(), f[5].data() + f[5].size(), row);
    if (ec != std::errc() || ptr != f[5].data() + f[5].size())
      throw ParseError(file, ln + 1, "invalid row index '" + std::string(f[5]) + "'");
    if (row >= static_cast<std::uint64_t>(table.rows()))
      throw ParseError(file, ln + 1, "row " + std::to_string(row) + " out of range for " + std::to_string(table.rows()) +
                                         " stored vectors");
    rows.push_back(static_cast<Index>(row));
  }
  RowMatrixXd feats(static_cast<Index>(rows.size()), table.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) feats.row(static_cast<Index>(k)) = table.row(rows[k]);
  return Dataset(std::move(meta), std::move(feats), normalize);
}

} // namespace

std::vector<std::string_view> split_fields(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  return lines;
}

void write_text(const fs::path& path, std::string_view text) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Dataset load_manifest(const fs::path& path, const LoadOptions& opts) {
  const auto lines = read_lines(path);
  const std::string file = path.string();
  if (lines.empty()) throw ParseError(file, 1, "missing header");
  const auto header = split_fields(lines.front());
  check_label_header(header, file);
  if (header.size() == 6 && header[5] == "row") {
    fs::path bin = opts.binary_path.value_or(fs::path(path).replace_extension(".bin"));
    return load_indexed(lines, file, bin, opts.normalize);
  }
  return load_inline(lines, header, file, opts.normalize);
}

void save_csv(const Dataset& ds, const fs::path& path) {
  std::ostringstream os;
  os << "record_id,subject,media_id,template_id,split";
  for (Index c = 0; c < ds.dim(); ++c) os << ",f" << c;
  os << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    write_labels(os, ds.meta(i));
    for (Index c = 0; c < ds.dim(); ++c) os << ',' << format_double(ds.features()(static_cast<Index>(i), c));
    os << '\n';
  }
  write_text(path, os.str());
}

void save_binary(const Dataset& ds, const fs::path& features_path, const fs::path& manifest_path) {
  write_feature_binary(features_path, ds.features());
  std::ostringstream os;
  os << "record_id,subject,media_id,template_id,split,row\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    write_labels(os, ds.meta(i));
    os << ',' << i << '\n';
  }
  write_text(manifest_path, os.str());
}

RowMatrixXd read_feature_binary(const fs::path& path) {
  const auto bytes = read_bytes(path);
  const std::string file = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kFeatureMagic.data(), 4) != 0)
    throw ParseError(file, 0, "not a TPE1 feature file");
  const std::uint32_t count = get_u32(bytes.data() + 4);
  const std::uint32_t dim = get_u32(bytes.data() + 8);
  const std::uint64_t expect = 12 + std::uint64_t(count) * dim * 4;
  if (bytes.size() != expect)
    throw ParseError(file, 0, "size " + std::to_string(bytes.size()) + " does not match header (" + std::to_string(expect) + ")");
  RowMatrixXd out(count, dim);
  const unsigned char* p = bytes.data() + 12;
  for (std::uint32_t r = 0; r < count; ++r)
    for (std::uint32_t c = 0; c < dim; ++c, p += 4) out(r, c) = static_cast<double>(std::bit_cast<float>(get_u32(p)));
  if (!out.allFinite()) throw ParseError(file, 0, "non-finite feature value");
  return out;
}

void write_feature_binary(const fs::path& path, const RowMatrixXd& values) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out.write(kFeatureMagic.data(), 4);
  put_u32(out, static_cast<std::uint32_t>(values.rows()));
  put_u32(out, static_cast<std::uint32_t>(values.cols()));
  for (Index r = 0; r < values.rows(); ++r)
    for (Index c = 0; c < values.cols(); ++c) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(values(r, c))));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

MatrixXd read_matrix(const fs::path& path) {
  const auto bytes = read_bytes(path);
  const std::string file = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMatrixMagic.data(), 4) != 0)
    throw ParseError(file, 0, "not a TPEW matrix file");
  const std::uint32_t rows = get_u32(bytes.data() + 4);
  const std::uint32_t cols = get_u32(bytes.data() + 8);
  const std::uint64_t expect = 12 + std::uint64_t(rows) * cols * 8;
  if (bytes.size() != expect)
    throw ParseError(file, 0, "size " + std::to_string(bytes.size()) + " does not match header (" + std::to_string(expect) + ")");
  MatrixXd w(rows, cols);
  const unsigned char* p = bytes.data() + 12;
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c, p += 8) w(r, c) = std::bit_cast<double>(get_u64(p));
  if (!w.allFinite()) throw ParseError(file, 0, "non-finite matrix entry");
  return w;
}

void write_matrix(const fs::path& path, const MatrixXd& w) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out.write(kMatrixMagic.data(), 4);
  put_u32(out, static_cast<std::uint32_t>(w.rows()));
  put_u32(out, static_cast<std::uint32_t>(w.cols()));
  for (Index r = 0; r < w.rows(); ++r)
    for (Index c = 0; c < w.cols(); ++c) put_u64(out, std::bit_cast<std::uint64_t>(w(r, c)));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

} // namespace tpe
