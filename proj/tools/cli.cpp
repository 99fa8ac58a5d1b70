#include "cli.hpp"

#include "tpe/clustering.hpp"
#include "tpe/embedding.hpp"
#include "tpe/identify.hpp"
#include "tpe/io.hpp"
#include "tpe/pipelines.hpp"
#include "tpe/pooling.hpp"
#include "tpe/synthetic.hpp"
#include "tpe/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace tpe::cli {

namespace {

using json = nlohmann::ordered_json;

/// JSON has no infinities; non-finite values become strings.
json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string fmt(double v) {
  if (std::isfinite(v)) return format_double(v);
  return v > 0 ? "inf" : "-inf";
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json options_json(const CLI::App& sub) {
  json opts = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const auto& lnames = opt->get_lnames();
    if (lnames.empty() || lnames.front() == "help") continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      std::string joined;
      for (std::size_t i = 0; i < res.size(); ++i) joined += (i ? "," : "") + res[i];
      opts[lnames.front()] = joined;
    } else {
      opts[lnames.front()] = opt->get_default_str();
    }
  }
  return opts;
}

void write_run_json(const fs::path& out, const CLI::App& sub, std::optional<std::uint64_t> seed) {
  json j;
  j["tool"] = "tpe";
  j["subcommand"] = sub.get_name();
  j["options"] = options_json(sub);
  j["seed"] = seed ? json(*seed) : json(nullptr);
  write_json(out / "run.json", j);
}

struct Input {
  std::string path;
  std::string binary;
  bool no_normalize = false;

  Dataset load() const { return load_path(path); }
  Dataset load_path(const std::string& p) const {
    LoadOptions opts;
    opts.normalize = !no_normalize;
    if (!binary.empty()) opts.binary_path = binary;
    return load_manifest(p, opts);
  }
};

void add_input(CLI::App* sub, Input& in, const std::string& name = "--input") {
  sub->add_option(name, in.path, "Feature manifest (inline CSV or row-indexed)")->required()->check(CLI::ExistingFile);
  sub->add_option("--binary", in.binary, "TPE1 feature file for a row-indexed manifest")->check(CLI::ExistingFile);
  sub->add_flag("--no-normalize", in.no_normalize, "Keep features as stored instead of unit-normalizing on load");
}

/// Records tagged train when any record carries a split; otherwise everything.
Dataset training_part(const Dataset& ds) {
  for (const auto& m : ds.metas())
    if (m.split) return ds.filter_split(Split::Train);
  return ds;
}

void save_dataset(const Dataset& ds, const fs::path& out, const std::string& stem, const std::string& format) {
  if (format == "bin")
    save_binary(ds, out / (stem + ".bin"), out / (stem + ".csv"));
  else
    save_csv(ds, out / (stem + ".csv"));
}

Dataset maybe_project(const Dataset& ds, const std::string& matrix) {
  if (matrix.empty()) return ds;
  return project_dataset(read_matrix(matrix), ds);
}

std::vector<int> labels_or_empty(const Dataset& ds) {
  for (const auto& m : ds.metas())
    if (m.subject.empty()) return {};
  return ds.subject_labels();
}

std::string roc_csv(const RocCurve& curve) {
  std::ostringstream os;
  os << "threshold,fmr,fnmr\n";
  for (const auto& p : curve.points) os << fmt(p.threshold) << ',' << fmt(p.fmr) << ',' << fmt(p.fnmr) << '\n';
  return os.str();
}

json rate_json(const RateAt& r, const char* achieved_key, const char* value_key) {
  json j;
  j[value_key] = num(r.value);
  j[achieved_key] = num(r.achieved_rate);
  j["threshold"] = num(r.threshold);
  return j;
}

bool parse_pair_label(std::string_view s) {
  if (s == "1" || s == "genuine" || s == "true" || s == "same") return true;
  if (s == "0" || s == "impostor" || s == "false" || s == "diff") return false;
  throw InvalidArgument("pair label must be 1/0 or genuine/impostor, got '" + std::string(s) + "'");
}

std::string pr_csv_rows(const std::vector<PrPoint>& pr, const std::string& prefix) {
  std::ostringstream os;
  for (const auto& p : pr)
    os << prefix << fmt(p.cutoff) << ',' << fmt(p.scores.precision) << ',' << fmt(p.scores.recall) << '\n';
  return os.str();
}

json pairwise_json(const PairwiseScores& s) {
  json j;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["f1"] = s.f1;
  j["precision_defined"] = s.precision_defined;
  j["recall_defined"] = s.recall_defined;
  return j;
}

int report_error(const char* kind, const std::string& message, int code) {
  json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  std::cerr << j.dump() << std::endl;
  return code;
}

void apply_thread_cap() {
  if (const char* env = std::getenv("TPE_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) throw CLI::ValidationError("TPE_THREADS", "must be a positive integer");
    Eigen::setNbThreads(static_cast<int>(n));
  }
}

} // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Triplet probability embedding: training, evaluation and clustering of feature vectors", "tpe"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  fs::path out;
  std::function<void()> action;
  std::optional<std::uint64_t> run_seed;
  CLI::App* chosen = nullptr;

  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", out, "Output directory")->required(); };

  // gen
  SynthConfig synth;
  TemplateSynthConfig tsynth;
  std::size_t templates = 0;
  double gen_train_fraction = -1.0;
  std::string gen_format = "csv";
  {
    auto* sub = app.add_subcommand("gen", "Generate a seeded synthetic feature set");
    sub->add_option("--subjects", synth.num_subjects)->check(CLI::PositiveNumber);
    sub->add_option("--per", synth.records_per_subject, "Records per subject")->check(CLI::PositiveNumber);
    sub->add_option("--dim", synth.dim)->check(CLI::PositiveNumber);
    sub->add_option("--noise", synth.within_class_noise, "Within-class Gaussian noise")->check(CLI::NonNegativeNumber);
    sub->add_option("--media", synth.media_per_subject, "Media per subject")->check(CLI::PositiveNumber);
    sub->add_option("--media-offset", synth.media_offset)->check(CLI::NonNegativeNumber);
    sub->add_option("--identity-rank", synth.identity_rank);
    sub->add_option("--nuisance-rank", synth.nuisance_rank);
    sub->add_option("--nuisance", synth.nuisance_noise)->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", synth.seed);
    sub->add_option("--templates", templates, "Templates per subject; > 0 switches to the template generator");
    sub->add_option("--media-per-template", tsynth.media_per_template)->check(CLI::PositiveNumber);
    sub->add_option("--dominant-frames", tsynth.dominant_frames)->check(CLI::PositiveNumber);
    sub->add_option("--other-frames", tsynth.other_frames);
    sub->add_option("--train-fraction", gen_train_fraction, "Tag the first fraction of subjects train, the rest test");
    sub->add_option("--format", gen_format)->check(CLI::IsMember({"csv", "bin"}));
    add_out(sub);
    sub->callback([&, sub] {
      chosen = sub;
      run_seed = synth.seed;
      action = [&] {
        Dataset ds;
        if (templates > 0) {
          tsynth.num_subjects = synth.num_subjects;
          tsynth.templates_per_subject = templates;
          tsynth.dim = synth.dim;
          tsynth.within_class_noise = synth.within_class_noise;
          tsynth.media_offset = synth.media_offset;
          tsynth.identity_rank = synth.identity_rank;
          tsynth.nuisance_rank = synth.nuisance_rank;
          tsynth.nuisance_noise = synth.nuisance_noise;
          tsynth.seed = synth.seed;
          ds = generate_templates(tsynth);
        } else {
          ds = generate_synthetic(synth);
        }
        if (gen_train_fraction >= 0.0) ds = split_by_subject(ds, gen_train_fraction);
        save_dataset(ds, out, "features", gen_format);
      };
    });
  }

  // pca-init
  Input pca_in;
  Index pca_dim = 128;
  {
    auto* sub = app.add_subcommand("pca-init", "Write the PCA initialization of the embedding");
    add_input(sub, pca_in);
    sub->add_option("--dim", pca_dim, "Target dimension n")->check(CLI::PositiveNumber);
    add_out(sub);
    sub->callback([&, sub] {
      chosen = sub;
      action = [&] { write_matrix(out / "W.tpew", pca_init(training_part(pca_in.load()), pca_dim)); };
    });
  }

  // train
  Input train_in;
  TrainConfig tcfg;
  std::string method = "tpe";
  {
    auto* sub = app.add_subcommand("train", "Learn the embedding matrix by TPE or TDE");
    add_input(sub, train_in);
    sub->add_option("--method", method)->check(CLI::IsMember({"tpe", "tde"}));
    sub->add_option("--dim", tcfg.target_dim, "Target dimension n")->check(CLI::PositiveNumber);
    sub->add_option("--iters", tcfg.iterations);
    sub->add_option("--lr", tcfg.learning_rate)->check(CLI::PositiveNumber);
    sub->add_option("--pool", tcfg.negative_pool, "Negative candidates per step")->check(CLI::PositiveNumber);
    sub->add_option("--margin", tcfg.margin, "TDE hinge margin")->check(CLI::NonNegativeNumber);
    sub->add_option("--decay", tcfg.lr_decay, "Learning-rate decay factor")->check(CLI::PositiveNumber);
    sub->add_option("--decay-every", tcfg.decay_every, "Iterations between decays (0 = off)");
    sub->add_option("--batch", tcfg.batch_size)->check(CLI::PositiveNumber);
    sub->add_option("--log-every", tcfg.log_every);
    sub->add_option("--seed", tcfg.seed);
    add_out(sub);
    sub->callback([&, sub] {
      chosen = sub;
      run_seed = tcfg.seed;
      action = [&] {
        tcfg.method = parse_method(method);
        const TrainResult result = train(training_part(train_in.load()), tcfg);
        write_matrix(out / "W.tpew", result.w);
        write_text(out / "train_log.csv", format_train_log(result.log));
      };
    });
  }

  // project
  Input proj_in;
  std::string proj_matrix, proj_format = "csv";
  {
    auto* sub = app.add_subcommand("project", "Apply an embedding matrix to every record");
    add_input(sub, proj_in);
    sub->add_option("--matrix", proj_matrix, "TPEW matrix file")->required()->check(CLI::ExistingFile);
    sub->add_option("--format", proj_format)->check(CLI::IsMember({"csv", "bin"}));
    add_out(sub);
    sub->callback([&, sub] {
      chosen = sub;
      action = [&] { save_dataset(maybe_project(proj_in.load(), proj_matrix), out, "projected", proj_format); };
    });
  }

  // pool
  Input pool_in;
  std::string pool_mode = "media";
  {
    auto* sub = app.add_subcommand("pool", "Flatten templates into one vector each");
    add_input(sub, pool_in);
    sub->add_option("--mode", pool_mode)->check(CLI::IsMember({"average", "media"}));
    add_out(sub);
    sub->callback([&, sub] {
      chosen = sub;
      action = [&] {
        const Dataset pooled = pool_dataset(pool_in.load(), parse_pool_mode(pool_mode));
        save_binary(pooled, out / "templates.bin", out / "templates.csv");
      };
    });
  }

  // verify-eval
  Input ver_in;
  std::string ver_pairs, ver_matrix;
  std::vector<double> ver_fmr{0.001, 0.01, 0.1};
  {
    auto* sub = app.add_subcommand("verify-eval", "ROC, EER, AUC and FNMR@FMR over a pair protocol");
    add_input(sub, ver_in, "--features");
    sub->add_option("--pairs", ver_pairs, "CSV id_a,id_b,label")->required()->check(CLI::ExistingFile);
    sub->add_option("--matrix", ver_matrix, "Optional TPEW matrix applied before scoring")->check(CLI::ExistingFile);
    sub->add_option("--fmr", ver_fmr)->delimiter(',')->check(CLI::Range(0.0, 1.0));
    add_out(sub);
    sub->callback([&, sub] {
      chosen = sub;
      action = [&] {
        const Dataset ds = maybe_project(ver_in.load(), ver_matrix);
        const auto lines = read_lines(ver_pairs);
        if (lines.empty()) throw ParseError(ver_pairs, 1, "missing header");
        const auto header = split_fields(lines.front());
        if (header.size() != 3 || header[0] != "id_a" || header[1] != "id_b" || header[2] != "label")
          throw ParseError(ver_pairs, 1, "expected header id_a,id_b,label");
        ScoreSet scores;
        for (std::size_t ln = 1; ln < lines.size(); ++ln) {
          if (lines[ln].empty() || lines[ln] == "\r") continue;
          const auto f = split_fields(lines[ln]);
          if (f.size() != 3) throw ParseError(ver_pairs, ln + 1, "expected 3 columns");
          const auto a = ds.find(f[0]);
          const auto b = ds.find(f[1]);
          if (!a || !b)
            throw ParseError(ver_pairs, ln + 1, "unknown id '" + std::string(!a ? f[0] : f[1]) + "'");
          bool genuine = false;
          try {
            genuine = parse_pair_label(f[2]);
          } catch (const InvalidArgument& e) {
            throw ParseError(ver_pairs, ln + 1, e.what());
          }
          scores.add(cosine(ds.feature(*a), ds.feature(*b)), genuine);
        }
        const RocCurve curve = roc(scores);
        write_text(out / "roc.csv", roc_csv(curve));
        json summary;
        summary["genuine"] = scores.genuine.size();
        summary["impostor"] = scores.impostor.size();
        summary["eer"] = eer(curve);
        summary["auc"] = auc(curve);
        json at = json::object();
        for (double f : ver_fmr) at[fmt(f)] = rate_json(fnmr_at_fmr(curve, f), "achieved_fmr", "fnmr");
        summary["fnmr_at_fmr"] = at;
        write_json(out / "summary.json", summary);
      };
    });
  }

  // ident-eval
  Input gal_in, probe_in;
  std::string ident_matrix;
  std::vector<std::size_t> ident_ranks{1, 10};
  std::vector<double> ident_fpir{0.01, 0.1};
  {
    auto* sub = app.add_subcommand("ident-eval", "Closed-set CMC and open-set TPIR@FPIR");
    add_input(sub, gal_in, "--gallery");
    sub->add_option("--probes", probe_in.path, "Probe manifest")->required()->check(CLI::ExistingFile);
    sub->add_option("--matrix", ident_matrix, "Optional TPEW matrix applied before scoring")->check(CLI::ExistingFile);
    sub->add_option("--ranks", ident_ranks)->delimiter(',')->check(CLI::PositiveNumber);
    sub->add_option("--fpir", ident_fpir)->delimiter(',')->check(CLI::Range(0.0, 1.0));
    add_out(sub);
    sub->callback([&, sub] {
      chosen = sub;
      action = [&] {
        probe_in.no_normalize = gal_in.no_normalize;
        const Dataset gallery = maybe_project(gal_in.load(), ident_matrix);
        const Dataset probes = maybe_project(probe_in.load(), ident_matrix);
        IdentProtocol protocol;
        for (const auto& m : gallery.metas()) protocol.gallery_subjects.push_back(m.subject);
        protocol.gallery = gallery.features();
        protocol.probes = probes.features();
        for (const auto& m : probes.metas())
          protocol.probe_subjects.push_back(m.subject.empty() ? std::nullopt : std::optional<std::string>(m.subject));
        const IdentScores all = score_protocol(protocol);

        IdentScores mated;
        std::vector<Index> mated_rows;
        for (std::size_t p = 0; p < all.mate.size(); ++p)
          if (all.mate[p]) mated_rows.push_back(static_cast<Index>(p));
        mated.scores.resize(static_cast<Index>(mated_rows.size()), all.scores.cols());
        for (std::size_t k = 0; k < mated_rows.size(); ++k) {
          mated.scores.row(static_cast<Index>(k)) = all.scores.row(mated_rows[k]);
          mated.mate.push_back(all.mate[static_cast<std::size_t>(mated_rows[k])]);
        }

        json summary;
        summary["probes"] = all.mate.size();
        summary["mated"] = mated_rows.size();
        summary["unmated"] = all.mate.size() - mated_rows.size();
        std::ostringstream cmc_csv;
        cmc_csv << "rank,rate\n";
        json cmc_j = json::object();
        if (!mated_rows.empty()) {
          const auto rates = cmc(mated, ident_ranks);
          for (std::size_t k = 0; k < ident_ranks.size(); ++k) {
            cmc_csv << ident_ranks[k] << ',' << fmt(rates[k]) << '\n';
            cmc_j[std::to_string(ident_ranks[k])] = rates[k];
          }
        }
        summary["cmc"] = cmc_j;
        if (summary["unmated"].get<std::size_t>() > 0 && !mated_rows.empty()) {
          json tp = json::object();
          for (const auto& p : tpir_at_fpir(all, ident_fpir)) {
            json j;
            j["tpir"] = num(p.tpir);
            j["achieved_fpir"] = num(p.achieved_fpir);
            j["threshold"] = num(p.threshold);
            tp[fmt(p.fpir)] = j;
          }
          summary["tpir_at_fpir"] = tp;
        } else {
          summary["tpir_at_fpir"] = nullptr;
        }
        write_text(out / "cmc.csv", cmc_csv.str());
        write_json(out / "summary.json", summary);
      };
    });
  }

  // cluster
  Input clu_in;
  std::string clu_matrix, clu_learn, clu_algo = "agglo";
  double clu_cutoff = -1.0, clu_grid_step = 0.01;
  std::size_t clu_min_size = 3, clu_k = 0, clu_restarts = 10;
  std::uint64_t clu_seed = 7;
  {
    auto* sub = app.add_subcommand("cluster", "Agglomerative (average linkage) or k-means clustering");
    add_input(sub, clu_in);
    sub->add_option("--matrix", clu_matrix, "Optional TPEW matrix applied first")->check(CLI::ExistingFile);
    auto* cut_opt = sub->add_option("--cutoff", clu_cutoff, "Cosine-distance cutoff in [0, 2]")->check(CLI::Range(0.0, 2.0));
    auto* learn_opt =
        sub->add_option("--learn-cutoff", clu_learn, "Labeled manifest to learn the cutoff on")->check(CLI::ExistingFile);
    cut_opt->excludes(learn_opt);
    sub->add_option("--grid-step", clu_grid_step, "Cutoff grid spacing over [0, 1]")->check(CLI::Range(0.001, 1.0));
    sub->add_option("--min-size", clu_min_size, "Clusters smaller than this are pruned from the count");
    sub->add_option("--algo", clu_algo)->check(CLI::IsMember({"agglo", "kmeans"}));
    sub->add_option("--k", clu_k);
    sub->add_option("--restarts", clu_restarts)->check(CLI::PositiveNumber);
    sub->add_option("--seed", clu_seed);
    add_out(sub);
    sub->callback([&, sub, cut_opt, learn_opt] {
      chosen = sub;
      if (clu_algo == "agglo" && cut_opt->count() == 0 && learn_opt->count() == 0)
        throw CLI::RequiredError("--cutoff or --learn-cutoff");
      if (clu_algo == "kmeans") {
        if (clu_k == 0) throw CLI::RequiredError("--k");
        run_seed = clu_seed;
      }
      action = [&] {
        const Dataset ds = maybe_project(clu_in.load(), clu_matrix);
        const auto labels = labels_or_empty(ds);
        std::vector<double> grid;
        for (int k = 0;; ++k) {
          const double c = k * clu_grid_step;
          if (c > 1.0 + 1e-12) break;
          grid.push_back(std::min(c, 1.0));
        }

        json summary;
        summary["algo"] = clu_algo;
        ClusterAssignment assignment;
        if (clu_algo == "kmeans") {
          const KMeansResult km = kmeans(ds.features(), clu_k, clu_restarts, clu_seed);
          assignment = km.assignment;
          summary["k"] = clu_k;
          summary["cost"] = km.cost;
        } else {
          double cutoff = clu_cutoff;
          if (!clu_learn.empty()) {
            const Dataset train = maybe_project(clu_in.load_path(clu_learn), clu_matrix);
            const auto train_labels = labels_or_empty(train);
            if (train_labels.empty()) throw InvalidArgument("--learn-cutoff manifest needs a subject on every record");
            cutoff = learn_cutoff(train.features(), train_labels, grid);
          }
          const Dendrogram tree = build_dendrogram(ds.features());
          assignment = cut(tree, cutoff);
          summary["cutoff"] = cutoff;
          if (!labels.empty()) {
            std::string pr = "cutoff,precision,recall\n" + pr_csv_rows(pr_curve(tree, labels, grid), "");
            write_text(out / "pr.csv", pr);
          }
        }
        const PruneResult pruned = prune(assignment, clu_min_size);
        summary["records"] = ds.size();
        summary["clusters_raw"] = pruned.raw_count;
        summary["clusters_pruned"] = pruned.pruned_count;
        summary["min_size"] = clu_min_size;
        if (!labels.empty()) summary["pairwise"] = pairwise_json(pairwise_metrics(assignment, labels));

        std::ostringstream os;
        os << "record_id,cluster\n";
        for (std::size_t i = 0; i < ds.size(); ++i) os << ds.meta(i).record_id << ',' << assignment.cluster[i] << '\n';
        write_text(out / "assignment.csv", os.str());
        write_json(out / "clusters.json", summary);
      };
    });
  }

  // repro-fig3
  std::uint64_t fig_seed = 7;
  std::optional<std::size_t> fig_iters;
  std::optional<double> fig_noise, fig_nuisance;
  {
    auto* sub = app.add_subcommand("repro-fig3", "Raw vs TDE vs TPE verification on synthetic held-out subjects");
    sub->add_option("--seed", fig_seed);
    sub->add_option("--iters", fig_iters, "Override SGD iterations");
    sub->add_option("--noise", fig_noise, "Override within-class noise")->check(CLI::NonNegativeNumber);
    sub->add_option("--nuisance", fig_nuisance, "Override nuisance noise")->check(CLI::NonNegativeNumber);
    add_out(sub);
    sub->callback([&, sub] {
      chosen = sub;
      run_seed = fig_seed;
      action = [&] {
        VerifyReproConfig cfg = default_verify_repro(fig_seed);
        if (fig_iters) cfg.train.iterations = *fig_iters;
        if (fig_noise) cfg.data.within_class_noise = *fig_noise;
        if (fig_nuisance) cfg.data.nuisance_noise = *fig_nuisance;
        const VerifyReproReport report = repro_verify(cfg);

        std::ostringstream curves, table;
        curves << "method,threshold,fmr,fnmr\n";
        table << "method,eer,auc\n";
        json summary;
        summary["genuine_pairs"] = report.genuine_pairs;
        summary["impostor_pairs"] = report.impostor_pairs;
        for (const auto& row : report.rows) {
          for (const auto& p : row.curve.points)
            curves << row.method << ',' << fmt(p.threshold) << ',' << fmt(p.fmr) << ',' << fmt(p.fnmr) << '\n';
          table << row.method << ',' << fmt(row.eer) << ',' << fmt(row.auc) << '\n';
          summary["eer_" + row.method] = row.eer;
          summary["auc_" + row.method] = row.auc;
        }
        json at = json::object();
        for (const auto& row : report.rows) {
          json per = json::object();
          for (std::size_t k = 0; k < cfg.fmr_targets.size(); ++k)
            per[fmt(cfg.fmr_targets[k])] = rate_json(row.fnmr_at[k], "achieved_fmr", "fnmr");
          at[row.method] = per;
        }
        summary["fnmr_at_fmr"] = at;
        write_text(out / "curves.csv", curves.str());
        write_text(out / "eer.csv", table.str());
        write_json(out / "summary.json", summary);
      };
    });
  }

  // repro-cluster
  std::uint64_t rc_seed = 7;
  std::optional<std::size_t> rc_iters;
  std::optional<double> rc_noise, rc_media_offset, rc_nuisance;
  {
    auto* sub = app.add_subcommand("repro-cluster", "Raw vs TPE clustering of pooled synthetic templates");
    sub->add_option("--seed", rc_seed);
    sub->add_option("--iters", rc_iters, "Override SGD iterations");
    sub->add_option("--noise", rc_noise, "Override within-class noise")->check(CLI::NonNegativeNumber);
    sub->add_option("--media-offset", rc_media_offset, "Override media offset")->check(CLI::NonNegativeNumber);
    sub->add_option("--nuisance", rc_nuisance, "Override nuisance noise")->check(CLI::NonNegativeNumber);
    add_out(sub);
    sub->callback([&, sub] {
      chosen = sub;
      run_seed = rc_seed;
      action = [&] {
        ClusterReproConfig cfg = default_cluster_repro(rc_seed);
        if (rc_iters) cfg.train.iterations = *rc_iters;
        if (rc_noise) cfg.data.within_class_noise = *rc_noise;
        if (rc_media_offset) cfg.data.media_offset = *rc_media_offset;
        if (rc_nuisance) cfg.data.nuisance_noise = *rc_nuisance;
        const ClusterReproReport report = repro_cluster(cfg);

        std::ostringstream pr;
        pr << "features,pooling,cutoff,precision,recall\n";
        json rows = json::array();
        for (const auto& row : report.rows) {
          pr << pr_csv_rows(row.pr, row.features + "," + std::string(to_string(row.pooling)) + ",");
          json j;
          j["features"] = row.features;
          j["pooling"] = to_string(row.pooling);
          j["cutoff"] = row.cutoff;
          j["pairwise"] = pairwise_json(row.test);
          j["clusters_raw"] = row.clusters;
          j["clusters_pruned"] = row.pruned_clusters;
          rows.push_back(j);
        }
        json summary;
        summary["test_subjects"] = report.test_subjects;
        summary["test_templates"] = report.test_templates;
        summary["f1_raw"] = report.row("raw", PoolMode::Media).test.f1;
        summary["f1_tpe"] = report.row("tpe", PoolMode::Media).test.f1;
        summary["rows"] = rows;
        write_text(out / "pr.csv", pr.str());
        write_json(out / "summary.json", summary);
      };
    });
  }

  try {
    apply_thread_cap();
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kUsage);
  }

  try {
    fs::create_directories(out);
    action();
    write_run_json(out, *chosen, run_seed);
  } catch (const DivergenceError& e) {
    return report_error(e.kind(), e.what(), kDivergence);
  } catch (const Error& e) {
    return report_error(e.kind(), e.what(), kData);
  } catch (const fs::filesystem_error& e) {
    return report_error("io", e.what(), kData);
  }
  return kOk;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"tpe"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace tpe::cli
