// subq — submodel-uncertainty experiments from the command line.
//
// Subcommands:
//   subq synthetic      --experiment coverage|factorial|importance|vrf|all
//   subq contact-center --mode frequentist|bayesian
//   subq report <dir>
//
// Every experiment writes its tables/JSON/SVG into --out plus a manifest.json
// echoing the effective configuration. Outputs are byte-identical across
// --threads values.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "subq/contact_center.hpp"
#include "subq/report_io.hpp"
#include "subq/svg.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace subq;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CliOptions {
  std::optional<int> B, S, n, macro, trees, m;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  int threads = 0;  // 0 = hardware count
  std::string out = ".";
  std::string config_path;
  std::string experiment = "all";
  std::string scenario = "all";
  std::string mode = "frequentist";
  json config;  // parsed --config file, {} if absent
};

void add_common_flags(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("--B", o.B, "instances per submodel");
  cmd->add_option("--S", o.S, "design stacks");
  cmd->add_option("--n", o.n, "replications per configuration");
  cmd->add_option("--macro", o.macro, "macro-replications");
  cmd->add_option("--m", o.m, "training records per submodel");
  cmd->add_option("--alpha", o.alpha, "interval level");
  cmd->add_option("--trees", o.trees, "bagging trees");
  cmd->add_option("--seed", o.seed, "root RNG seed (fallback: SUBQ_SEED env)");
  cmd->add_option("--threads", o.threads, "worker threads (0 = hardware)");
  cmd->add_option("--out", o.out, "output directory (must exist)");
  cmd->add_option("--config", o.config_path, "JSON config file");
}

/// Fill any unset option from the config file, then from the given default.
template <class T>
T effective(const std::optional<T>& flag, const json& config,
            const char* key, T fallback) {
  if (flag) return *flag;
  if (config.contains(key)) return config.at(key).get<T>();
  return fallback;
}

std::uint64_t effective_seed(const CliOptions& o) {
  if (o.seed) return *o.seed;
  if (o.config.contains("seed")) return o.config.at("seed").get<std::uint64_t>();
  if (const char* env = std::getenv("SUBQ_SEED")) return std::stoull(env);
  return 0;
}

int effective_threads(const CliOptions& o) {
  if (o.threads > 0) return o.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void load_config_file(CliOptions& o) {
  if (o.config_path.empty()) {
    o.config = json::object();
    return;
  }
  o.config = json::parse(read_text_file(o.config_path));
}

int validate_out_dir(const std::string& out) {
  if (!fs::is_directory(out)) {
    std::cerr << "subq: output directory does not exist: " << out << "\n";
    return 2;
  }
  return 0;
}

fs::path out_path(const CliOptions& o, const std::string& name) {
  return fs::path(o.out) / name;
}

void write_manifest(const CliOptions& o, const std::string& command,
                    json parameters) {
  json manifest{{"tool", "subq"},
                {"version", kVersion},
                {"command", command},
                {"seed", effective_seed(o)},
                {"parameters", std::move(parameters)}};
  if (!o.config.empty()) manifest["config_file"] = o.config;
  write_text_file(out_path(o, "manifest.json").string(), manifest.dump(2) + "\n");
}

// ---- synthetic ---------------------------------------------------------------

const std::vector<std::string> kSyntheticNames = {"x1_input", "x2_input",
                                                  "p_response", "q_response"};

int run_synthetic(const CliOptions& o) {
  if (int rc = validate_out_dir(o.out)) return rc;
  const std::uint64_t seed = effective_seed(o);
  const int threads = effective_threads(o);
  const bool all = o.experiment == "all";
  std::string stage = "setup";

  try {
    json params{{"experiment", o.experiment}, {"scenario", o.scenario}};

    if (all || o.experiment == "coverage") {
      stage = "coverage";
      SyntheticOptions opt;
      opt.macro = effective(o.macro, o.config, "macro", 100);
      opt.m = effective(o.m, o.config, "m", 50);
      opt.B = effective(o.B, o.config, "B", 100);
      opt.S = effective(o.S, o.config, "S", 1);
      opt.n = effective(o.n, o.config, "n", 50);
      opt.alpha = effective(o.alpha, o.config, "alpha", 0.1);
      opt.threads = threads;
      params["coverage"] = {{"macro", opt.macro}, {"m", opt.m}, {"B", opt.B},
                            {"S", opt.S}, {"n", opt.n}, {"alpha", opt.alpha}};

      std::vector<std::pair<std::string, Scenario>> wanted;
      if (o.scenario == "all" || o.scenario == "no-epistemic")
        wanted.emplace_back("no-epistemic", Scenario::NoEpistemic);
      if (o.scenario == "all" || o.scenario == "input-only")
        wanted.emplace_back("input-only", Scenario::InputOnly);
      if (o.scenario == "all" || o.scenario == "full-su")
        wanted.emplace_back("full-su", Scenario::FullSU);
      if (wanted.empty())
        throw SubqError("unknown scenario: " + o.scenario);

      std::vector<std::string> labels;
      std::vector<CoverageResult> results;
      // every scenario sees the same stream: common random numbers make the
      // width comparison across scenarios paired
      RandomStream root(seed);
      for (const auto& [label, scenario] : wanted) {
        labels.push_back(label);
        results.push_back(coverage_experiment(scenario, opt, root.derive(0)));
        std::cerr << "coverage " << label << ": "
                  << results.back().coverage * 100 << "% width "
                  << results.back().mean_width << "\n";
      }
      write_text_file(out_path(o, "table1.csv").string(),
                      table1_csv(labels, results));
    }

    if (all || o.experiment == "factorial") {
      stage = "factorial";
      FactorialOptions fopt;
      fopt.R = effective(o.macro, o.config, "macro", 100);
      fopt.n = effective(o.n, o.config, "n", 500);
      fopt.threads = threads;
      const int m = effective(o.m, o.config, "m", 50);
      params["factorial"] = {{"R", fopt.R}, {"n", fopt.n}, {"m", m}};
      const auto study =
          synthetic_factorial(fopt, m, RandomStream(seed).derive(3));
      write_text_file(out_path(o, "fig2_factorial.csv").string(),
                      factorial_csv(study, kSyntheticNames));
    }

    if (all || o.experiment == "importance") {
      stage = "importance";
      SyntheticOptions opt;
      opt.macro = effective(o.macro, o.config, "macro", 100);
      opt.m = effective(o.m, o.config, "m", 50);
      opt.B = effective(o.B, o.config, "B", 8);
      opt.S = effective(o.S, o.config, "S", 64);
      opt.n = effective(o.n, o.config, "n", 800);
      opt.bag_trees = effective(o.trees, o.config, "trees", 50);
      opt.threads = threads;
      params["importance"] = {{"macro", opt.macro}, {"m", opt.m},
                              {"B", opt.B}, {"S", opt.S}, {"n", opt.n},
                              {"trees", opt.bag_trees}};
      const auto reports =
          importance_experiment(opt, RandomStream(seed).derive(4));
      write_text_file(out_path(o, "fig4_importance.json").string(),
                      importance_summary_json(reports, kSyntheticNames) + "\n");
      std::vector<double> mean_bagged(4, 0.0);
      for (const auto& r : reports.bagged)
        for (std::size_t l = 0; l < 4; ++l)
          mean_bagged[l] += r.per_submodel[l] / static_cast<double>(reports.bagged.size());
      write_text_file(out_path(o, "fig4_importance.svg").string(),
                      bar_chart_svg(kSyntheticNames, mean_bagged,
                                    "Mean bagged importance scores"));
    }

    if (all || o.experiment == "vrf") {
      stage = "vrf";
      SyntheticOptions opt;
      opt.macro = effective(o.macro, o.config, "macro", 100);
      opt.m = effective(o.m, o.config, "m", 25);
      opt.B = effective(o.B, o.config, "B", 8);
      opt.S = effective(o.S, o.config, "S", 64);
      opt.n = effective(o.n, o.config, "n", 50);
      opt.bag_trees = effective(o.trees, o.config, "trees", 50);
      opt.threads = threads;
      params["vrf"] = {{"macro", opt.macro}, {"m", opt.m}, {"B", opt.B},
                       {"S", opt.S}, {"n", opt.n}, {"trees", opt.bag_trees}};
      const auto result = vrf_experiment(opt, RandomStream(seed).derive(5));
      write_text_file(out_path(o, "table2_vrf.csv").string(),
                      vrf_csv(result, kSyntheticNames));
    }

    stage = "manifest";
    write_manifest(o, "synthetic", std::move(params));
  } catch (const std::exception& ex) {
    std::cerr << "subq: stage '" << stage << "' failed: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

// ---- contact-center ----------------------------------------------------------

int run_contact_center(const CliOptions& o) {
  if (int rc = validate_out_dir(o.out)) return rc;
  const std::uint64_t seed = effective_seed(o);
  std::string stage = "setup";

  try {
    CenterConfig config;
    if (o.config.contains("center"))
      config = CenterConfig::from_json(o.config.at("center").dump());

    TwinOptions opt;
    opt.B = effective(o.B, o.config, "B", 5);
    opt.S = effective(o.S, o.config, "S", 2);
    opt.n = effective(o.n, o.config, "n", 100);
    opt.bag_trees = effective(o.trees, o.config, "trees", 40);
    opt.alpha = effective(o.alpha, o.config, "alpha", 0.1);
    if (o.config.contains("truth_replications"))
      opt.truth_replications = o.config.at("truth_replications").get<int>();
    if (o.config.contains("nosu_replications"))
      opt.nosu_replications = o.config.at("nosu_replications").get<int>();
    opt.threads = effective_threads(o);

    TwinMode mode;
    if (o.mode == "frequentist") mode = TwinMode::Frequentist;
    else if (o.mode == "bayesian") mode = TwinMode::Bayesian;
    else throw SubqError("unknown mode: " + o.mode);

    stage = "twin-experiment";
    const auto result =
        run_twin_experiment(mode, config, opt, RandomStream(seed));

    stage = "artifacts";
    const std::vector<std::string> names(center_submodel_names().begin(),
                                         center_submodel_names().end());
    write_text_file(out_path(o, "epoch_ci.csv").string(),
                    epoch_ci_csv(result.epochs));
    write_text_file(out_path(o, "epoch_ci.svg").string(),
                    epoch_whisker_svg(result.epochs,
                                      "Per-epoch KPI intervals (" + o.mode + ")"));
    json agg{{"uniform",
              json::parse(importance_to_json(result.aggregate_uniform, names))},
             {"avg_tss_weighted",
              json::parse(importance_to_json(result.aggregate_tss_weighted, names))}};
    write_text_file(out_path(o, "aggregate_importance.json").string(),
                    agg.dump(2) + "\n");
    write_text_file(out_path(o, "aggregate_importance.svg").string(),
                    bar_chart_svg(names, result.aggregate_uniform.per_submodel,
                                  "Aggregate importance (" + o.mode + ")"));
    write_text_file(out_path(o, "state_average_bias.json").string(),
                    bias_to_json(result.bias) + "\n");

    for (std::size_t i = 0; i < result.su_tables.size(); ++i) {
      const fs::path dir = out_path(o, "state_" + std::to_string(i));
      fs::create_directory(dir);
      write_text_file((dir / "design.csv").string(),
                      design_to_csv(result.su_tables[i].design));
      write_text_file((dir / "outputs.csv").string(),
                      output_table_to_csv(result.su_tables[i]));
    }

    stage = "manifest";
    write_manifest(o, "contact-center",
                   json{{"mode", o.mode},
                        {"B", opt.B},
                        {"S", opt.S},
                        {"n", opt.n},
                        {"trees", opt.bag_trees},
                        {"alpha", opt.alpha},
                        {"truth_replications", opt.truth_replications},
                        {"nosu_replications", opt.nosu_replications},
                        {"nosu_interval", "naive_t"},
                        {"center", json::parse(config.to_json())}});
  } catch (const std::exception& ex) {
    std::cerr << "subq: stage '" << stage << "' failed: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

// ---- report ------------------------------------------------------------------

void append_csv_block(std::ostringstream& out, const fs::path& path,
                      const std::string& title) {
  if (!fs::exists(path)) return;
  out << "## " << title << "\n\n```\n" << read_text_file(path.string())
      << "```\n\n";
}

void append_svg_ref(std::ostringstream& out, const fs::path& dir,
                    const std::string& file, const std::string& title) {
  if (!fs::exists(dir / file)) return;
  out << "## " << title << "\n\n![" << title << "](" << file << ")\n\n";
}

void append_json_block(std::ostringstream& out, const fs::path& path,
                       const std::string& title) {
  if (!fs::exists(path)) return;
  out << "## " << title << "\n\n```json\n" << read_text_file(path.string());
  out << "```\n\n";
}

int run_report(const std::string& dir) {
  try {
    const fs::path root(dir);
    if (!fs::exists(root / "manifest.json"))
      throw MissingManifest("no manifest.json in " + dir);
    const json manifest = json::parse(read_text_file((root / "manifest.json").string()));

    std::ostringstream out;
    out << "# subq experiment report\n\n"
        << "- command: " << manifest.value("command", std::string("?")) << "\n"
        << "- seed: " << manifest.value("seed", 0ull) << "\n"
        << "- tool version: " << manifest.value("version", std::string("?"))
        << "\n\n";

    append_csv_block(out, root / "table1.csv", "Coverage (Table 1 layout)");
    append_csv_block(out, root / "fig2_factorial.csv", "Factorial bias/variance study");
    append_json_block(out, root / "fig4_importance.json", "Importance scores");
    append_svg_ref(out, root, "fig4_importance.svg", "Importance chart");
    append_csv_block(out, root / "table2_vrf.csv", "Variance reduction factors");
    append_csv_block(out, root / "epoch_ci.csv", "Per-epoch intervals");
    append_svg_ref(out, root, "epoch_ci.svg", "Per-epoch interval chart");
    append_json_block(out, root / "aggregate_importance.json",
                      "Aggregate importance across states");
    append_svg_ref(out, root, "aggregate_importance.svg",
                   "Aggregate importance chart");
    append_json_block(out, root / "state_average_bias.json", "State-average bias");

    write_text_file((root / "report.md").string(), out.str());
    std::cout << (root / "report.md").string() << "\n";
  } catch (const std::exception& ex) {
    std::cerr << "subq: report failed: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"submodel-uncertainty quantification experiments"};
  app.require_subcommand(1);

  CliOptions synth_opts, center_opts;
  std::string report_dir;

  CLI::App* synth = app.add_subcommand("synthetic", "known-truth benchmark");
  add_common_flags(synth, synth_opts);
  synth->add_option("--experiment", synth_opts.experiment,
                    "coverage|factorial|importance|vrf|all");
  synth->add_option("--scenario", synth_opts.scenario,
                    "no-epistemic|input-only|full-su|all");

  CLI::App* center = app.add_subcommand("contact-center", "digital-twin benchmark");
  add_common_flags(center, center_opts);
  center->add_option("--mode", center_opts.mode, "frequentist|bayesian");

  CLI::App* report = app.add_subcommand("report", "render a Markdown summary");
  report->add_option("dir", report_dir, "experiment output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      load_config_file(synth_opts);
      return run_synthetic(synth_opts);
    }
    if (center->parsed()) {
      load_config_file(center_opts);
      return run_contact_center(center_opts);
    }
  } catch (const std::exception& ex) {
    std::cerr << "subq: config validation failed: " << ex.what() << "\n";
    return 2;
  }
  if (report->parsed()) return run_report(report_dir);
  return 2;
}
