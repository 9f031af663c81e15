/*
 * Copyright 2026 The CID Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: train, explain, evaluate, agree, ablate.
//
// Exit codes: 0 success, 1 data/model error, 2 usage error, 3 counterfactual
// budget exhaustion. Primary results go to --out (or stdout); diagnostics go
// to stderr.

#pragma once

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cid/cid.hpp"
#include "cid/counterfactual.hpp"
#include "cid/dataset.hpp"
#include "cid/evaluation.hpp"
#include "cid/external_model.hpp"
#include "cid/log.hpp"
#include "cid/model.hpp"
#include "cid/random.hpp"
#include "cid/serialization.hpp"

namespace cid::cli {

enum ExitCode : int { kOk = 0, kDataError = 1, kUsageError = 2, kBudgetExhausted = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string data;
  std::string label = "label";
  std::string model;
  std::string out;
  std::string format = "json";
  double test_fraction = 0.3;
  std::size_t jobs = 1;
};

struct CidOptions {
  std::size_t m = 50;
  std::string cf_method = "random";
  std::string kernel = "gaussian";
  std::size_t repeats = 1;
  std::size_t grid_points = kDefaultGridPoints;
  double grid_pad = kDefaultGridPad;
  double metric_k = 1.0;
  std::size_t sparsity = 0;
  std::size_t max_attempts = 0;
  std::size_t population = 0;
  std::size_t generations = 20;
  double lambda = 0.2;
  std::vector<std::string> vary;
};

using ModelFactory = std::function<std::unique_ptr<Classifier>()>;

// Data split and model shared by the experiment subcommands.
struct Context {
  DatasetTable train;
  DatasetTable test;
  ModelFactory make_model;
  std::unique_ptr<Classifier> model;
};

inline ModelFactory model_factory(const std::string& spec) {
  static const std::string kExternal = "external:";
  if (spec.rfind(kExternal, 0) == 0) {
    const auto command = split_command(spec.substr(kExternal.size()));
    if (command.empty()) throw UsageError("--model external: needs a command");
    return [command] { return connect_external(command); };
  }
  auto model = std::make_shared<const LogisticModel>(LogisticModel::load(spec));
  return [model] { return std::make_unique<LogisticModel>(*model); };
}

inline void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required option ") + flag);
}

inline std::pair<DatasetTable, DatasetTable> load_split(const GlobalOptions& g) {
  require(g.data, "--data");
  const DatasetTable table = load_csv(g.data, g.label);
  return split(table, g.test_fraction, g.seed);
}

inline Context load_context(const GlobalOptions& g) {
  require(g.model, "--model");
  auto [train, test] = load_split(g);
  Context ctx{std::move(train), std::move(test), model_factory(g.model), nullptr};
  ctx.model = ctx.make_model();
  if (ctx.model->dim() != ctx.train.d()) {
    throw DataError("model expects " + std::to_string(ctx.model->dim()) +
                    " features but the data has " + std::to_string(ctx.train.d()));
  }
  return ctx;
}

inline CidConfig make_cid_config(const CidOptions& o, const DatasetTable& table) {
  CidConfig cfg;
  cfg.kernel = parse_kernel(o.kernel);
  cfg.cf.m = o.m;
  cfg.cf.method = parse_cf_method(o.cf_method);
  cfg.cf.sparsity = o.sparsity;
  cfg.cf.max_attempts = o.max_attempts;
  cfg.cf.genetic.population = o.population;
  cfg.cf.genetic.generations = o.generations;
  cfg.cf.genetic.lambda = o.lambda;
  if (!o.vary.empty()) {
    std::vector<std::size_t> idx;
    const auto names = table.feature_names();
    for (const auto& v : o.vary) {
      const auto it = std::find(names.begin(), names.end(), v);
      if (it != names.end()) {
        idx.push_back(static_cast<std::size_t>(it - names.begin()));
        continue;
      }
      double num = 0.0;
      if (!detail::parse_double(v, num) || num < 0 || num != std::floor(num)) {
        throw UsageError("--vary: unknown feature '" + v + "'");
      }
      idx.push_back(static_cast<std::size_t>(num));
    }
    cfg.cf.features_to_vary = idx;
  }
  cfg.n_grid = o.grid_points;
  cfg.grid_pad = o.grid_pad;
  cfg.k = o.metric_k;
  cfg.repeats = o.repeats;
  cfg.validate(table.d());
  return cfg;
}

// Counterfactual seed for test instance `index`.
inline std::uint64_t instance_seed(std::uint64_t seed, std::size_t index) {
  return mix_seed(seed, index);
}

// "all", "i", "a:b" (half-open) or "i,j,k".
inline std::vector<std::size_t> parse_instances(const std::string& spec, std::size_t n) {
  std::vector<std::size_t> out;
  auto number = [&](const std::string& s) {
    double v = 0.0;
    if (!detail::parse_double(s, v) || v < 0 || v != std::floor(v)) {
      throw UsageError("--instances: bad index '" + s + "'");
    }
    return static_cast<std::size_t>(v);
  };
  if (spec.empty() || spec == "all") {
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);
  } else if (const auto colon = spec.find(':'); colon != std::string::npos) {
    const std::size_t a = number(spec.substr(0, colon));
    const std::size_t b = number(spec.substr(colon + 1));
    if (b <= a) throw UsageError("--instances: empty range '" + spec + "'");
    for (std::size_t i = a; i < b; ++i) out.push_back(i);
  } else {
    std::stringstream ss(spec);
    for (std::string tok; std::getline(ss, tok, ',');) out.push_back(number(tok));
  }
  for (std::size_t i : out) {
    if (i >= n) {
      throw UsageError("--instances: index " + std::to_string(i) + " out of range (test split has " +
                       std::to_string(n) + " rows)");
    }
  }
  return out;
}

// Runs fn(i, model) for every i in [0, n) on `jobs` workers, each with its
// own model session. Results must be written by index; the first exception
// by index order is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, const ModelFactory& factory,
                  const Classifier& shared, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i, shared);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::exception_ptr setup_error;
    std::mutex setup_mu;
    for (std::size_t w = 0; w < std::min(jobs, n); ++w) {
      workers.emplace_back([&] {
        std::unique_ptr<Classifier> own;
        try {
          own = factory();
        } catch (...) {
          std::lock_guard<std::mutex> lock(setup_mu);
          if (!setup_error) setup_error = std::current_exception();
          return;
        }
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i, *own);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : workers) t.join();
    if (setup_error) std::rethrow_exception(setup_error);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Explanation per instance; instances whose counterfactual search ran out
// of budget are left empty and reported in `skipped`.
struct ExplanationSet {
  std::vector<std::optional<Explanation>> by_index;
  std::vector<std::size_t> skipped;
};

inline ExplanationSet compute_cid(const Context& ctx, const std::vector<std::size_t>& instances,
                                  const CidConfig& base, std::uint64_t seed, std::size_t jobs) {
  ExplanationSet out;
  out.by_index.resize(instances.size());
  std::vector<char> failed(instances.size(), 0);
  parallel_for(instances.size(), jobs, ctx.make_model, *ctx.model,
               [&](std::size_t i, const Classifier& model) {
                 CidConfig cfg = base;
                 cfg.cf.seed = instance_seed(seed, instances[i]);
                 try {
                   const auto iv = explain(ctx.test.row(instances[i]), model, ctx.train, cfg);
                   out.by_index[i] = Explanation{static_cast<long>(instances[i]), iv.scores};
                 } catch (const BudgetExhaustedError& e) {
                   log().warn("instance {}: {}", instances[i], e.what());
                   failed[i] = 1;
                 }
               });
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (failed[i]) out.skipped.push_back(instances[i]);
  }
  return out;
}

inline ExplanationSet random_explanations(const std::vector<std::size_t>& instances,
                                          std::size_t d, std::uint64_t seed) {
  ExplanationSet out;
  for (std::size_t idx : instances) {
    Rng rng(mix_seed(seed ^ 0x72616e646f6dULL, idx));
    Explanation e{static_cast<long>(idx), std::vector<double>(d)};
    for (double& s : e.scores) s = uniform01(rng);
    out.by_index.push_back(std::move(e));
  }
  return out;
}

inline bool is_random_source(const std::string& s) { return s == "random" || s.rfind("random:", 0) == 0; }

inline std::uint64_t random_source_seed(const std::string& s, std::uint64_t fallback) {
  if (s == "random") return fallback;
  double v = 0.0;
  const std::string tail = s.substr(7);
  if (!detail::parse_double(tail, v) || v < 0 || v != std::floor(v)) {
    throw UsageError("bad random source '" + s + "' (expected random or random:<seed>)");
  }
  return static_cast<std::uint64_t>(v);
}

inline std::map<long, Explanation> index_file(const ExplanationFile& file, const std::string& path) {
  std::map<long, Explanation> out;
  for (const auto& e : file.explanations) {
    if (!out.emplace(e.instance_id, e).second) {
      throw DataError(path + ": duplicate instance_id " + std::to_string(e.instance_id));
    }
  }
  return out;
}

class Output {
 public:
  Output(const GlobalOptions& g, std::ostream& out, std::ostream& err)
      : path_(g.out), out_(out), err_(err) {}

  void write(const std::string& content) const {
    if (path_.empty()) {
      out_ << content;
      out_.flush();
      return;
    }
    std::ofstream f(path_, std::ios::binary);
    if (!f) throw DataError("cannot write output file '" + path_ + "'");
    f << content;
  }

  // Secondary human-readable lines: stdout when the primary result goes to a
  // file, stderr otherwise.
  std::ostream& info() const { return path_.empty() ? err_ : out_; }

 private:
  std::string path_;
  std::ostream& out_;
  std::ostream& err_;
};

inline void check_format(const GlobalOptions& g, std::initializer_list<const char*> allowed,
                         const char* command) {
  for (const char* a : allowed) {
    if (g.format == a) return;
  }
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw UsageError(std::string(command) + ": --format must be one of " + list);
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << j.dump() << '\n';
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::size_t epochs = 1000;
  double learning_rate = 0.1;
  double l2 = 0.0;
  bool no_standardize = false;
};

inline int cmd_train(const GlobalOptions& g, const TrainOptions& o, std::ostream& out,
                     std::ostream& err) {
  check_format(g, {"json"}, "train");
  auto [train, test] = load_split(g);
  LogisticTrainOptions opts;
  opts.epochs = o.epochs;
  opts.learning_rate = o.learning_rate;
  opts.l2 = o.l2;
  opts.standardize = !o.no_standardize;
  opts.seed = g.seed;
  const LogisticModel model = train_logistic(train, opts);
  Output output(g, out, err);
  output.write(model.to_json().dump() + "\n");
  char buf[128];
  std::snprintf(buf, sizeof(buf), "train accuracy %.4f (%zu rows)\ntest accuracy %.4f (%zu rows)\n",
                accuracy(model, train), train.size(), accuracy(model, test), test.size());
  output.info() << buf;
  return kOk;
}

// ---------------------------------------------------------------- explain

struct ExplainOptions {
  std::string instance = "0";
  std::size_t k_top = 0;
  std::string dump_cfs;
  std::string dump_densities;
};

inline int cmd_explain(const GlobalOptions& g, const CidOptions& c, const ExplainOptions& o,
                       std::ostream& out, std::ostream& err) {
  check_format(g, {"json", "csv"}, "explain");
  Context ctx = load_context(g);
  CidConfig cfg = make_cid_config(c, ctx.train);
  if (o.k_top > ctx.train.d()) {
    throw UsageError("--k-top " + std::to_string(o.k_top) + " exceeds d = " +
                     std::to_string(ctx.train.d()));
  }

  std::vector<double> x;
  if (!o.instance.empty() && o.instance.front() == '[') {
    try {
      x = nlohmann::json::parse(o.instance).get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("--instance: cannot parse JSON vector: " + std::string(e.what()));
    }
    if (x.size() != ctx.train.d()) {
      throw UsageError("--instance vector has " + std::to_string(x.size()) +
                       " entries, expected " + std::to_string(ctx.train.d()));
    }
    cfg.cf.seed = g.seed;
  } else {
    const auto idx = parse_instances(o.instance, ctx.test.size());
    if (idx.size() != 1) throw UsageError("--instance selects exactly one test row");
    const auto row = ctx.test.row(idx.front());
    x.assign(row.begin(), row.end());
    cfg.cf.seed = instance_seed(g.seed, idx.front());
  }

  const bool want_trace = !o.dump_cfs.empty() || !o.dump_densities.empty();
  std::vector<RepeatTrace> trace;
  const ImportanceVector iv = explain(x, *ctx.model, ctx.train, cfg, want_trace ? &trace : nullptr);

  Output output(g, out, err);
  if (g.format == "csv") {
    std::ostringstream s;
    write_importance_csv(iv, s);
    output.write(s.str());
  } else {
    output.write(to_json(iv).dump() + "\n");
  }
  if (!o.dump_cfs.empty()) write_json_file(o.dump_cfs, cfs_dump(trace));
  if (!o.dump_densities.empty()) {
    write_json_file(o.dump_densities, densities_dump(trace, iv.feature_names));
  }
  if (o.k_top > 0) {
    const auto top = rank(iv, o.k_top);
    output.info() << "top " << o.k_top << ":";
    for (std::size_t j : top) output.info() << ' ' << iv.feature_names[j];
    output.info() << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::string explanations = "cid";
  std::string metric = "both";
  std::string instances = "all";
  std::string trajectory;
  std::string save_explanations;
};

inline int cmd_evaluate(const GlobalOptions& g, const CidOptions& c, const EvaluateOptions& o,
                        std::ostream& out, std::ostream& err) {
  check_format(g, {"json", "csv", "text"}, "evaluate");
  if (o.metric != "comp" && o.metric != "suff" && o.metric != "both") {
    throw UsageError("--metric must be comp, suff or both");
  }
  const bool comp = o.metric != "suff";
  const bool suff = o.metric != "comp";
  Context ctx = load_context(g);
  const std::size_t d = ctx.train.d();

  std::vector<Explanation> explanations;
  std::vector<std::size_t> skipped;
  if (o.explanations == "cid" || is_random_source(o.explanations)) {
    const auto instances = parse_instances(o.instances, ctx.test.size());
    ExplanationSet set =
        o.explanations == "cid"
            ? compute_cid(ctx, instances, make_cid_config(c, ctx.train), g.seed, g.jobs)
            : random_explanations(instances, d, random_source_seed(o.explanations, g.seed));
    skipped = set.skipped;
    for (auto& e : set.by_index) {
      if (e) explanations.push_back(std::move(*e));
    }
  } else {
    const ExplanationFile file = read_explanations(o.explanations);
    if (file.feature_names.size() != d) {
      throw DataError(o.explanations + ": " + std::to_string(file.feature_names.size()) +
                      " feature columns, data has " + std::to_string(d));
    }
    const auto by_id = index_file(file, o.explanations);
    std::vector<std::size_t> wanted;
    if (o.instances == "all") {
      for (const auto& [id, e] : by_id) wanted.push_back(static_cast<std::size_t>(id));
    } else {
      wanted = parse_instances(o.instances, ctx.test.size());
    }
    for (std::size_t id : wanted) {
      const auto it = by_id.find(static_cast<long>(id));
      if (it == by_id.end()) {
        throw DataError(o.explanations + ": no explanation for instance " + std::to_string(id));
      }
      if (id >= ctx.test.size()) {
        throw DataError(o.explanations + ": instance_id " + std::to_string(id) +
                        " does not exist (test split has " + std::to_string(ctx.test.size()) +
                        " rows)");
      }
      explanations.push_back(it->second);
    }
  }
  if (explanations.empty()) {
    throw BudgetExhaustedError("no instance could be explained");
  }

  const auto means = ctx.train.means();
  std::vector<FaithfulnessCurve> curves(explanations.size());
  parallel_for(explanations.size(), g.jobs, ctx.make_model, *ctx.model,
               [&](std::size_t i, const Classifier& model) {
                 curves[i] = faithfulness_curve(
                     ctx.test.row(static_cast<std::size_t>(explanations[i].instance_id)),
                     explanations[i], model, means);
               });
  std::vector<InstanceFaithfulness> rows;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    rows.push_back({explanations[i].instance_id, curves[i].comprehensiveness(),
                    curves[i].sufficiency()});
  }
  const EvaluationReport report = make_report(std::move(rows));

  Output output(g, out, err);
  if (g.format == "text") {
    output.write(report_table({{o.explanations, report}}, comp, suff));
  } else if (g.format == "csv") {
    std::ostringstream s;
    s << "instance_id";
    if (comp) s << ",comprehensiveness";
    if (suff) s << ",sufficiency";
    s << '\n';
    for (const auto& p : report.per_instance) {
      s << p.instance_id;
      if (comp) s << ',' << detail::format_double(p.comprehensiveness);
      if (suff) s << ',' << detail::format_double(p.sufficiency);
      s << '\n';
    }
    output.write(s.str());
  } else {
    nlohmann::json j = to_json(report, comp, suff);
    j["explanations"] = o.explanations;
    j["skipped_instances"] = skipped;
    output.write(j.dump() + "\n");
  }
  if (!o.trajectory.empty()) {
    std::ofstream f(o.trajectory, std::ios::binary);
    if (!f) throw DataError("cannot write '" + o.trajectory + "'");
    f << "instance_id,l,removal,insertion\n";
    for (std::size_t i = 0; i < curves.size(); ++i) {
      for (std::size_t l = 0; l < curves[i].removal.size(); ++l) {
        f << explanations[i].instance_id << ',' << l << ','
          << detail::format_double(curves[i].removal[l]) << ','
          << detail::format_double(curves[i].insertion[l]) << '\n';
      }
    }
  }
  if (!o.save_explanations.empty()) {
    write_explanations(ExplanationFile{ctx.train.feature_names(), explanations}, o.save_explanations);
  }
  return kOk;
}

// ---------------------------------------------------------------- agree

struct AgreeOptions {
  std::string a;
  std::string b;
  std::size_t k_top = 4;
  std::string instances = "all";
};

inline int cmd_agree(const GlobalOptions& g, const CidOptions& c, const AgreeOptions& o,
                     std::ostream& out, std::ostream& err) {
  check_format(g, {"json", "csv", "text"}, "agree");
  require(o.a, "--a");
  require(o.b, "--b");
  auto computed = [](const std::string& s) { return s == "cid" || is_random_source(s); };

  std::optional<Context> ctx;
  if (computed(o.a) || computed(o.b)) ctx = load_context(g);

  std::map<std::string, ExplanationFile> files;
  for (const auto& src : {o.a, o.b}) {
    if (!computed(src) && !files.count(src)) files.emplace(src, read_explanations(src));
  }
  std::size_t d = ctx ? ctx->train.d() : files.begin()->second.feature_names.size();
  for (const auto& [path, f] : files) {
    if (f.feature_names.size() != d) {
      throw DataError(path + ": " + std::to_string(f.feature_names.size()) +
                      " feature columns, expected " + std::to_string(d));
    }
  }
  if (o.k_top < 1 || o.k_top > d) {
    throw UsageError("--k-top " + std::to_string(o.k_top) + " must lie in [1, " +
                     std::to_string(d) + "]");
  }

  // Instance ids: from the file(s) when present (they must agree), else
  // --instances over the test split.
  std::vector<std::size_t> ids;
  std::optional<std::set<long>> file_ids;
  for (const auto& [path, f] : files) {
    std::set<long> these;
    for (const auto& e : f.explanations) these.insert(e.instance_id);
    if (file_ids && *file_ids != these) {
      throw DataError("instance-id misalignment between '" + o.a + "' and '" + o.b + "'");
    }
    file_ids = these;
  }
  if (file_ids) {
    for (long id : *file_ids) ids.push_back(static_cast<std::size_t>(id));
    if (ctx) {
      for (std::size_t id : ids) {
        if (id >= ctx->test.size()) {
          throw DataError("instance_id " + std::to_string(id) + " is outside the test split");
        }
      }
    }
  } else {
    ids = parse_instances(o.instances, ctx->test.size());
  }

  auto resolve = [&](const std::string& src) {
    std::map<long, Explanation> out_map;
    if (src == "cid") {
      const auto set = compute_cid(*ctx, ids, make_cid_config(c, ctx->train), g.seed, g.jobs);
      for (const auto& e : set.by_index) {
        if (e) out_map.emplace(e->instance_id, *e);
      }
    } else if (is_random_source(src)) {
      const auto set = random_explanations(ids, d, random_source_seed(src, g.seed));
      for (const auto& e : set.by_index) out_map.emplace(e->instance_id, *e);
    } else {
      out_map = index_file(files.at(src), src);
    }
    return out_map;
  };
  const auto ea = resolve(o.a);
  const auto eb = o.b == o.a ? ea : resolve(o.b);

  nlohmann::json per = nlohmann::json::array();
  std::vector<double> values;
  std::vector<std::size_t> skipped;
  std::ostringstream csv;
  csv << "instance_id,agreement\n";
  for (std::size_t id : ids) {
    const auto ia = ea.find(static_cast<long>(id));
    const auto ib = eb.find(static_cast<long>(id));
    if (ia == ea.end() || ib == eb.end()) {
      skipped.push_back(id);
      continue;
    }
    const double v = feature_agreement(ia->second, ib->second, o.k_top);
    values.push_back(v);
    per.push_back({{"instance_id", id}, {"agreement", v}});
    csv << id << ',' << detail::format_double(v) << '\n';
  }
  if (values.empty()) throw BudgetExhaustedError("no instance could be compared");
  const Aggregate agg = aggregate(values);

  Output output(g, out, err);
  if (g.format == "csv") {
    output.write(csv.str());
  } else if (g.format == "text") {
    output.write("feature agreement (k = " + std::to_string(o.k_top) + ", n = " +
                 std::to_string(agg.n) + "): " + format_cell(agg.mean, agg.ci, 2) + "\n");
  } else {
    nlohmann::json j = {{"a", o.a},
                        {"b", o.b},
                        {"k_top", o.k_top},
                        {"n", agg.n},
                        {"mean", agg.mean},
                        {"ci", agg.ci},
                        {"cell", format_cell(agg.mean, agg.ci, 2)},
                        {"per_instance", std::move(per)},
                        {"skipped_instances", skipped}};
    output.write(j.dump() + "\n");
  }
  return kOk;
}

// ---------------------------------------------------------------- ablate

struct AblateOptions {
  std::vector<std::string> kernels = {"gaussian", "epanechnikov", "exponential"};
  std::vector<std::string> cf_methods = {"random", "genetic"};
  std::string instances = "0:20";
  std::size_t k_top = 0;  // 0 means min(4, d)
};

inline int cmd_ablate(const GlobalOptions& g, const CidOptions& c, const AblateOptions& o,
                      std::ostream& out, std::ostream& err) {
  check_format(g, {"json", "text"}, "ablate");
  if (o.kernels.empty() || o.cf_methods.empty()) {
    throw UsageError("ablate needs at least one kernel and one counterfactual method");
  }
  struct Setting {
    std::string kernel, method;
    CidConfig cfg;
  };
  std::vector<Setting> settings;
  for (const auto& k : o.kernels) parse_kernel(k);
  for (const auto& m : o.cf_methods) parse_cf_method(m);
  Context ctx = load_context(g);
  const std::size_t d = ctx.train.d();
  const std::size_t k_top = o.k_top > 0 ? o.k_top : std::min<std::size_t>(4, d);
  if (k_top > d) throw UsageError("--k-top exceeds d = " + std::to_string(d));
  for (const auto& m : o.cf_methods) {
    for (const auto& k : o.kernels) {
      CidOptions co = c;
      co.kernel = k;
      co.cf_method = m;
      settings.push_back({k, m, make_cid_config(co, ctx.train)});
    }
  }
  const auto instances = parse_instances(o.instances, ctx.test.size());

  std::vector<ExplanationSet> results;
  std::vector<double> runtimes;
  for (const auto& s : settings) {
    const auto t0 = std::chrono::steady_clock::now();
    results.push_back(compute_cid(ctx, instances, s.cfg, g.seed, g.jobs));
    runtimes.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  // Only instances explained under every setting are compared.
  std::vector<std::size_t> common;
  std::vector<std::size_t> skipped;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    bool ok = true;
    for (const auto& r : results) ok = ok && r.by_index[i].has_value();
    (ok ? common : skipped).push_back(i);
  }
  if (common.empty()) throw BudgetExhaustedError("no instance could be explained under every setting");

  const auto means = ctx.train.means();
  nlohmann::json jsettings = nlohmann::json::array();
  std::vector<std::pair<std::string, EvaluationReport>> table_rows;
  for (std::size_t s = 0; s < settings.size(); ++s) {
    std::vector<InstanceFaithfulness> rows;
    for (std::size_t i : common) {
      const auto& e = *results[s].by_index[i];
      const auto curve = faithfulness_curve(ctx.test.row(instances[i]), e, *ctx.model, means);
      rows.push_back({e.instance_id, curve.comprehensiveness(), curve.sufficiency()});
    }
    const EvaluationReport rep = make_report(std::move(rows));
    jsettings.push_back({{"kernel", settings[s].kernel},
                         {"cf_method", settings[s].method},
                         {"runtime_seconds", runtimes[s]},
                         {"failed_instances", results[s].skipped.size()},
                         {"comprehensiveness", {{"mean", rep.mean_comp}, {"ci", rep.ci_comp}}},
                         {"sufficiency", {{"mean", rep.mean_suff}, {"ci", rep.ci_suff}}}});
    table_rows.emplace_back(settings[s].kernel + "/" + settings[s].method, rep);
  }

  const std::size_t ns = settings.size();
  nlohmann::json labels = nlohmann::json::array();
  nlohmann::json mean_m = nlohmann::json::array(), ci_m = nlohmann::json::array();
  std::ostringstream text_matrix;
  for (const auto& s : settings) labels.push_back(s.kernel + "/" + s.method);
  for (std::size_t a = 0; a < ns; ++a) {
    nlohmann::json mrow = nlohmann::json::array(), crow = nlohmann::json::array();
    text_matrix << labels[a].get<std::string>() << ':';
    for (std::size_t b = 0; b < ns; ++b) {
      std::vector<double> vals;
      for (std::size_t i : common) {
        vals.push_back(feature_agreement(*results[a].by_index[i], *results[b].by_index[i], k_top));
      }
      const Aggregate agg = aggregate(vals);
      mrow.push_back(agg.mean);
      crow.push_back(agg.ci);
      text_matrix << "  " << format_cell(agg.mean, agg.ci, 2);
    }
    text_matrix << '\n';
    mean_m.push_back(std::move(mrow));
    ci_m.push_back(std::move(crow));
  }

  std::vector<std::size_t> skipped_ids;
  for (std::size_t i : skipped) skipped_ids.push_back(instances[i]);
  Output output(g, out, err);
  if (g.format == "text") {
    std::ostringstream s;
    s << report_table(table_rows) << "\nfeature agreement (k = " << k_top << ")\n"
      << text_matrix.str() << "\nruntime (s):";
    for (std::size_t i = 0; i < ns; ++i) {
      s << "  " << labels[i].get<std::string>() << '=' << runtimes[i];
    }
    s << '\n';
    output.write(s.str());
  } else {
    nlohmann::json j = {{"settings", std::move(jsettings)},
                        {"agreement", {{"labels", labels}, {"mean", mean_m}, {"ci", ci_m}}},
                        {"k_top", k_top},
                        {"n", common.size()},
                        {"skipped_instances", skipped_ids}};
    output.write(j.dump() + "\n");
  }
  return kOk;
}

// ---------------------------------------------------------------- driver

inline void add_cid_options(CLI::App* sub, CidOptions& c) {
  sub->add_option("--m", c.m, "Counterfactuals per set")->check(CLI::PositiveNumber);
  sub->add_option("--cf-method", c.cf_method, "Counterfactual generator")
      ->check(CLI::IsMember({"random", "genetic"}));
  sub->add_option("--kernel", c.kernel, "KDE kernel")
      ->check(CLI::IsMember({"gaussian", "epanechnikov", "exponential"}));
  sub->add_option("--repeats", c.repeats, "Counterfactual draws averaged per instance")
      ->check(CLI::PositiveNumber);
  sub->add_option("--grid-points", c.grid_points, "KDE grid size");
  sub->add_option("--grid-pad", c.grid_pad, "Grid padding in bandwidth multiples");
  sub->add_option("--metric-k", c.metric_k, "Order k of the dissimilarity d_k (>= 1)");
  sub->add_option("--sparsity", c.sparsity, "Features redrawn per random candidate (0: d/3)");
  sub->add_option("--max-attempts", c.max_attempts, "Random sampling budget (0: 200 m)");
  sub->add_option("--population", c.population, "Genetic population (0: 4 m)");
  sub->add_option("--generations", c.generations, "Genetic generations");
  sub->add_option("--lambda", c.lambda, "Genetic proximity weight");
  sub->add_option("--vary", c.vary, "Features allowed to change (names or indices)")
      ->delimiter(',');
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Counterfactual Importance Distribution: local feature importance from "
               "positive/negative counterfactual densities"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed (split and counterfactuals)");
  app.add_option("--data", g.data, "CSV file with a header row");
  app.add_option("--label", g.label, "Label column name");
  app.add_option("--model", g.model, "Weight JSON file or external:<command>");
  app.add_option("--out", g.out, "Output file (default: stdout)");
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  app.add_option("--test-fraction", g.test_fraction, "Fraction of rows held out for testing");
  app.add_option("--jobs", g.jobs, "Worker threads for per-instance work")
      ->check(CLI::PositiveNumber);

  TrainOptions train_o;
  auto* train = app.add_subcommand("train", "Train the logistic-regression classifier");
  train->add_option("--epochs", train_o.epochs, "Gradient-descent epochs");
  train->add_option("--lr", train_o.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
  train->add_option("--l2", train_o.l2, "L2 penalty")->check(CLI::NonNegativeNumber);
  train->add_flag("--no-standardize", train_o.no_standardize, "Train on raw feature units");

  CidOptions explain_c;
  ExplainOptions explain_o;
  auto* explain_cmd = app.add_subcommand("explain", "Feature importance for one instance");
  add_cid_options(explain_cmd, explain_c);
  explain_cmd->add_option("--instance", explain_o.instance,
                          "Test-split row index or inline JSON vector");
  explain_cmd->add_option("--k-top", explain_o.k_top, "Also print the top-k feature names");
  explain_cmd->add_option("--dump-cfs", explain_o.dump_cfs, "Write counterfactual sets (JSON)");
  explain_cmd->add_option("--dump-densities", explain_o.dump_densities,
                          "Write per-feature densities (JSON)");

  CidOptions eval_c;
  EvaluateOptions eval_o;
  auto* evaluate = app.add_subcommand("evaluate", "Comprehensiveness and sufficiency");
  add_cid_options(evaluate, eval_c);
  evaluate->add_option("--explanations", eval_o.explanations,
                       "Explanation CSV, cid, or random[:seed]");
  evaluate->add_option("--metric", eval_o.metric, "comp, suff or both")
      ->check(CLI::IsMember({"comp", "suff", "both"}));
  evaluate->add_option("--instances", eval_o.instances, "all, i, a:b or i,j,k");
  evaluate->add_option("--trajectory", eval_o.trajectory, "Write per-l masking curves (CSV)");
  evaluate->add_option("--save-explanations", eval_o.save_explanations,
                       "Write the evaluated explanations (CSV)");

  CidOptions agree_c;
  AgreeOptions agree_o;
  auto* agree = app.add_subcommand("agree", "Top-k feature agreement between two explainers");
  add_cid_options(agree, agree_c);
  agree->add_option("--a", agree_o.a, "Explanation CSV, cid, or random[:seed]");
  agree->add_option("--b", agree_o.b, "Explanation CSV, cid, or random[:seed]");
  agree->add_option("--k-top", agree_o.k_top, "Size of the top-k feature sets");
  agree->add_option("--instances", agree_o.instances, "all, i, a:b or i,j,k");

  CidOptions ablate_c;
  AblateOptions ablate_o;
  auto* ablate = app.add_subcommand("ablate", "Kernel x counterfactual-method grid");
  add_cid_options(ablate, ablate_c);
  ablate->add_option("--kernels", ablate_o.kernels, "Kernels to compare")->delimiter(',');
  ablate->add_option("--cf-methods", ablate_o.cf_methods, "Counterfactual methods to compare")
      ->delimiter(',');
  ablate->add_option("--instances", ablate_o.instances, "all, i, a:b or i,j,k");
  ablate->add_option("--k-top", ablate_o.k_top, "Agreement set size (0: min(4, d))");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (*train) return cmd_train(g, train_o, out, err);
    if (*explain_cmd) return cmd_explain(g, explain_c, explain_o, out, err);
    if (*evaluate) return cmd_evaluate(g, eval_c, eval_o, out, err);
    if (*agree) return cmd_agree(g, agree_c, agree_o, out, err);
    if (*ablate) return cmd_ablate(g, ablate_c, ablate_o, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const BudgetExhaustedError& e) {
    err << "error: " << e.what() << "\n";
    return kBudgetExhausted;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}

}  // namespace cid::cli
