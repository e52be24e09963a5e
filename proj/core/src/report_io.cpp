#include "subq/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "subq/errors.hpp"

namespace subq {

using json = nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

json importance_json_obj(const ImportanceReport& report,
                         const std::vector<std::string>& names) {
  json scores = json::object();
  json counts = json::object();
  for (std::size_t l = 0; l < report.per_submodel.size(); ++l) {
    const std::string& name =
        l < names.size() ? names[l] : "submodel_" + std::to_string(l + 1);
    scores[name] = report.per_submodel[l];
    counts[name] = report.split_counts.empty() ? 0 : report.split_counts[l];
  }
  return json{{"scores", std::move(scores)},
              {"split_counts", std::move(counts)},
              {"aleatoric", report.aleatoric},
              {"tss", report.tss},
              {"rss", report.rss},
              {"kind", report.kind == ImportanceKind::Bagged ? "bagged" : "single_tree"},
              {"bag_trees", report.bag_trees}};
}

}  // namespace

std::string importance_to_json(const ImportanceReport& report,
                               const std::vector<std::string>& names) {
  return importance_json_obj(report, names).dump(2);
}

std::string quantile_ci_to_json(const QuantileCI& ci) {
  return json{{"lower", ci.lower},
              {"upper", ci.upper},
              {"alpha", ci.alpha},
              {"method", "order_statistic_interpolation"}}
      .dump(2);
}

std::string interval_to_json(const Interval& ci) {
  return json{{"lower", ci.lower}, {"upper", ci.upper}}.dump(2);
}

std::string bias_to_json(const StateAverageBias& bias) {
  return json{{"estimates", bias.estimates},
              {"ci", json::parse(quantile_ci_to_json(bias.ci))},
              {"state_count", bias.state_count}}
      .dump(2);
}

std::string table1_csv(const std::vector<std::string>& scenarios,
                       const std::vector<CoverageResult>& results) {
  std::ostringstream out;
  out << "scenario,coverage,mean_width,width_se\n";
  for (std::size_t i = 0; i < results.size(); ++i)
    out << scenarios[i] << ',' << format_double(results[i].coverage) << ','
        << format_double(results[i].mean_width) << ','
        << format_double(results[i].width_se) << '\n';
  return out.str();
}

std::string factorial_csv(const FactorialStudyResult& result,
                          const std::vector<std::string>& names) {
  std::ostringstream out;
  out << "mask";
  for (const auto& name : names) out << ',' << name << "_estimated";
  out << ",bias,variance,mc_se\n";
  for (const auto& cell : result.cells) {
    out << cell.mask;
    for (std::size_t l = 0; l < names.size(); ++l)
      out << ',' << ((cell.mask >> l) & 1u);
    out << ',' << format_double(cell.bias) << ','
        << format_double(cell.variance) << ',' << format_double(cell.mc_se)
        << '\n';
  }
  return out.str();
}

std::string vrf_csv(const VrfResult& result,
                    const std::vector<std::string>& names) {
  const std::size_t macro = result.single_scores.size();
  std::ostringstream out;
  out << "submodel,vrf,var_single,var_bagged\n";
  for (std::size_t l = 0; l < result.factors.size(); ++l) {
    std::vector<double> single(macro), bagged(macro);
    for (std::size_t i = 0; i < macro; ++i) {
      single[i] = result.single_scores[i][l];
      bagged[i] = result.bagged_scores[i][l];
    }
    const std::string& name =
        l < names.size() ? names[l] : "submodel_" + std::to_string(l + 1);
    out << name << ',' << format_double(result.factors[l]) << ','
        << format_double(sample_variance(single)) << ','
        << format_double(sample_variance(bagged)) << '\n';
  }
  return out.str();
}

std::string importance_summary_json(const ImportanceExperimentResult& result,
                                    const std::vector<std::string>& names) {
  const std::size_t macro = result.single.size();
  const std::size_t L = macro == 0 ? 0 : result.single[0].per_submodel.size();
  json single = json::object();
  json bagged = json::object();
  for (std::size_t l = 0; l < L; ++l) {
    double s = 0.0, b = 0.0;
    for (std::size_t i = 0; i < macro; ++i) {
      s += result.single[i].per_submodel[l];
      b += result.bagged[i].per_submodel[l];
    }
    const std::string& name =
        l < names.size() ? names[l] : "submodel_" + std::to_string(l + 1);
    single[name] = s / static_cast<double>(macro);
    bagged[name] = b / static_cast<double>(macro);
  }
  return json{{"macro_replications", macro},
              {"mean_single_tree", std::move(single)},
              {"mean_bagged", std::move(bagged)}}
      .dump(2);
}

std::string epoch_ci_csv(const std::vector<EpochSummary>& epochs) {
  std::ostringstream out;
  out << "epoch,observed,truth_mean,truth_se,"
         "nosu_lower,nosu_upper,su_lower,su_upper\n";
  for (const auto& e : epochs)
    out << e.epoch << ',' << format_double(e.observed) << ','
        << format_double(e.truth_mean) << ',' << format_double(e.truth_se)
        << ',' << format_double(e.nosu_ci.lower) << ','
        << format_double(e.nosu_ci.upper) << ','
        << format_double(e.su_ci.lower) << ',' << format_double(e.su_ci.upper)
        << '\n';
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SubqError("cannot open for writing: " + path);
  out << content;
  if (!out) throw SubqError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SubqError("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace subq
