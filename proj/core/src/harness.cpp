#include "subq/harness.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <thread>

namespace subq {

std::size_t OutputTable::total_replications() const {
  std::size_t total = 0;
  for (const auto& row : outputs) total += row.size();
  return total;
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  pool.reserve(static_cast<std::size_t>(nthreads));
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

OutputTable run_experiment(const SimulationModel& model,
                           const std::vector<std::vector<SubmodelInstance>>& instances,
                           const DesignMatrix& design, int n,
                           const StateSnapshot* state, RandomStream root,
                           const HarnessOptions& options) {
  if (n < 1) throw SubqError("run_experiment: n must be >= 1");
  const auto L = static_cast<std::size_t>(design.L);
  if (instances.size() != L)
    throw SubqError("run_experiment: instance matrix has wrong L");

  OutputTable table;
  table.design = design;
  table.n = n;
  if (state) table.state_id = state->state_id;
  const std::size_t rows = design.rows.size();
  table.outputs.resize(rows);
  for (std::size_t r = 0; r < rows; ++r)
    table.outputs[r].resize(static_cast<std::size_t>(n) *
                            static_cast<std::size_t>(design.multiplicity[r]));

  // flatten (config, replication) pairs for work stealing
  std::vector<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < table.outputs[r].size(); ++j)
      work.emplace_back(r, j);

  parallel_for(work.size(), options.threads, [&](std::size_t w) {
    const auto [r, j] = work[w];
    std::vector<SubmodelInstance> config(L);
    for (std::size_t l = 0; l < L; ++l) {
      const int idx = design.rows[r][l];
      if (idx < 1 || idx > static_cast<int>(instances[l].size()))
        throw SubqError("run_experiment: design index outside 1..B");
      config[l] = instances[l][static_cast<std::size_t>(idx - 1)];
    }
    RandomStream stream = options.common_random_numbers
                              ? root.derive(j)
                              : root.derive(r).derive(j);
    try {
      table.outputs[r][j] = model.replicate(config, state, stream);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "model failure at configuration " << (r + 1) << ", replication "
         << (j + 1) << ": " << e.what();
      throw SubqError(os.str());
    }
  });

  table.config_means.resize(rows);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (double y : table.outputs[r]) s += y;
    table.config_means[r] = s / static_cast<double>(table.outputs[r].size());
    total += s;
    count += table.outputs[r].size();
  }
  table.grand_mean = total / static_cast<double>(count);
  return table;
}

OutputTable run_true_baseline(const SimulationModel& model,
                              const std::vector<SubmodelInstance>& instance_vec,
                              int n, RandomStream root,
                              const StateSnapshot* state,
                              const HarnessOptions& options) {
  DesignMatrix d;
  d.B = 1;
  d.S = 1;
  d.L = static_cast<int>(instance_vec.size());
  d.seed = root.root_seed();
  d.rows = {std::vector<int>(instance_vec.size(), 1)};
  d.multiplicity = {1};
  std::vector<std::vector<SubmodelInstance>> matrix;
  matrix.reserve(instance_vec.size());
  for (const auto& inst : instance_vec) matrix.push_back({inst});
  return run_experiment(model, matrix, d, n, state, root, options);
}

OutputTable merge_duplicate_configs(const OutputTable& table) {
  OutputTable out;
  out.design = deduplicate(table.design);
  out.n = table.n;
  out.state_id = table.state_id;
  out.grand_mean = table.grand_mean;
  out.outputs.resize(out.design.rows.size());

  std::map<std::vector<int>, std::size_t> index;
  for (std::size_t r = 0; r < out.design.rows.size(); ++r)
    index.emplace(out.design.rows[r], r);
  for (std::size_t r = 0; r < table.outputs.size(); ++r) {
    auto& dst = out.outputs[index.at(table.design.rows[r])];
    dst.insert(dst.end(), table.outputs[r].begin(), table.outputs[r].end());
  }
  out.config_means.resize(out.outputs.size());
  for (std::size_t r = 0; r < out.outputs.size(); ++r) {
    double s = 0.0;
    for (double y : out.outputs[r]) s += y;
    out.config_means[r] = s / static_cast<double>(out.outputs[r].size());
  }
  return out;
}

std::string output_table_to_csv(const OutputTable& table) {
  std::ostringstream os;
  os << "config,replication,kpi\n";
  char buf[64];
  for (std::size_t r = 0; r < table.outputs.size(); ++r)
    for (std::size_t j = 0; j < table.outputs[r].size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", table.outputs[r][j]);
      os << (r + 1) << ',' << (j + 1) << ',' << buf << '\n';
    }
  return os.str();
}

}  // namespace subq
