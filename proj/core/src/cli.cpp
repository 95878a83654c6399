#include "ccbf/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "ccbf/config.hpp"
#include "ccbf/log.hpp"
#include "ccbf/plot.hpp"
#include "ccbf/result_io.hpp"
#include "ccbf/simulate.hpp"

#ifndef CCBF_VERSION
#define CCBF_VERSION "0.0.0"
#endif

namespace ccbf {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Loaded {
  ScenarioConfig config;
  bool uncontrolled = false;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
}

Loaded load(const std::string& source) {
  if (fs::path(source).extension() == ".json" && fs::is_regular_file(source)) {
    json meta;
    try {
      meta = json::parse(read_file(source));
    } catch (const json::exception& e) {
      throw ConfigError({fmt::format("{}: not a run manifest: {}", source, e.what())});
    }
    if (!meta.contains("config") || !meta["config"].is_string()) {
      throw ConfigError({fmt::format("{}: manifest has no 'config' text", source)});
    }
    return {parse_config(meta["config"].get<std::string>()), meta.value("uncontrolled", false)};
  }
  return {load_config(source), false};
}

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw ConfigError({fmt::format("'{}': expected section.key=value", s)});
  return {s.substr(0, eq), s.substr(eq + 1)};
}

Loaded prepare(const RunOptions& o) {
  Loaded l = load(o.source);
  for (const auto& s : o.set) {
    auto [key, value] = split_assignment(s);
    apply_override(l.config, key, value);
  }
  auto& c = l.config;
  if (o.out) c.out_dir = *o.out;
  if (o.trace) c.trace = true;
  if (o.no_collab) c.collaboration = false;
  if (o.continue_on_infeasible) c.continue_on_infeasible = true;
  if (o.dt) c.dt = *o.dt;
  if (o.t_final) c.t_final = *o.t_final;
  if (o.uncontrolled) l.uncontrolled = true;
  auto issues = validate(c);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return l;
}

void report_config_error(const ConfigError& e, std::ostream& err) {
  err << "error: invalid scenario\n";
  for (const auto& i : e.issues()) err << "  " << i << '\n';
}

struct RunReport {
  int code = kExitOk;
  std::string summary;
};

RunReport execute(const Loaded& l, const std::string& source, std::ostream& err) {
  const ScenarioConfig& c = l.config;
  const fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

  const Scenario scenario = build_scenario(c);
  std::ofstream trace_file;
  long messages = 0;
  TraceSink sink;
  if (c.trace && !l.uncontrolled) {
    trace_file.open(dir / "messages.csv", std::ios::binary);
    if (!trace_file) throw IoError(fmt::format("cannot write '{}'", (dir / "messages.csv").string()));
    trace_file << message_csv_header() << '\n';
    sink = [&](double t, int sub, const CollabMessage& m) {
      trace_file << message_csv_row(t, sub, m) << '\n';
      ++messages;
    };
  }

  const auto start = std::chrono::steady_clock::now();
  ScenarioResult r;
  try {
    r = l.uncontrolled ? run_uncontrolled(scenario) : run_scenario(scenario, sink);
  } catch (const SimulationError& e) {
    err << "error: " << e.what() << '\n';
    return {kExitInternal, e.what()};
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (trace_file.is_open()) {
    trace_file.close();
    if (!trace_file) throw IoError(fmt::format("cannot write '{}'", (dir / "messages.csv").string()));
  }
  std::ostringstream csv;
  write_result_csv(csv, r);
  write_file(dir / "result.csv", csv.str());

  std::vector<std::string> files{"result.csv"};
  if (c.trace && !l.uncontrolled) files.push_back("messages.csv");
  const bool svg = std::find(c.formats.begin(), c.formats.end(), "svg") != c.formats.end();
  if (svg) {
    std::istringstream back(csv.str());
    const auto table = read_result_csv(back);
    PlotOptions po;
    po.thresholds.assign(c.threshold.data(), c.threshold.data() + c.threshold.size());
    po.control_limits.assign(c.u_max.data(), c.u_max.data() + c.u_max.size());
    write_file(dir / "plot.svg", plot_svg(table, po));
    files.push_back("plot.svg");
  }

  std::vector<double> min_h(c.nodes, std::numeric_limits<double>::infinity());
  for (const auto& x : r.states) {
    for (std::size_t i = 0; i < c.nodes; ++i) {
      min_h[i] = std::min(min_h[i], c.threshold(static_cast<Eigen::Index>(i)) - x[i](0));
    }
  }
  std::vector<std::size_t> infeasible;
  for (NodeId i : r.infeasible_nodes) infeasible.push_back(i + 1);

  json meta;
  meta["tool"] = "ccbf";
  meta["version"] = std::string(version());
  meta["source"] = source;
  meta["uncontrolled"] = l.uncontrolled;
  meta["config"] = normalize(c);
  meta["wall_time_s"] = wall;
  meta["rows"] = r.rows();
  meta["halted"] = r.halted;
  meta["infeasible_since"] = r.infeasible_since ? json(*r.infeasible_since) : json(nullptr);
  meta["infeasible_nodes"] = infeasible;
  meta["infeasible_steps"] = r.infeasible_steps;
  meta["relaxed_filter_count"] = r.relaxed_count();
  meta["messages"] = messages;
  meta["max_conservation_error"] = r.max_conservation_error;
  meta["min_h"] = min_h;
  meta["files"] = files;
  write_file(dir / "meta.json", meta.dump(2) + "\n");

  std::string summary = fmt::format("{} rows -> {} ({:.2f} s)", r.rows(), dir.string(), wall);
  if (r.halted) {
    err << fmt::format("error: terminally infeasible at t = {:.6g} (node(s) {}); stopped\n",
                       *r.infeasible_since, fmt::join(infeasible, ", "));
    return {kExitInfeasible, summary};
  }
  if (r.infeasible_steps > 0) {
    err << fmt::format("warning: {} step(s) terminally infeasible, continued with best-effort controls\n",
                       r.infeasible_steps);
  }
  return {kExitOk, summary};
}

template <typename F>
int guarded(std::ostream& err, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    report_config_error(e, err);
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ResultFormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char ch : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' ||
                    ch == '_' || ch == '=';
    out += ok ? ch : '-';
  }
  return out;
}

}  // namespace

std::string_view version() { return CCBF_VERSION; }

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Loaded l = prepare(opts);
    const RunReport rep = execute(l, opts.source, err);
    if (rep.code == kExitOk || rep.code == kExitInfeasible) out << rep.summary << '\n';
    return rep.code;
  });
}

int cmd_plot(const std::string& csv_path, const std::string& svg_path,
             const std::optional<std::string>& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", csv_path));
    ResultTable table;
    try {
      table = read_result_csv(in);
    } catch (const ResultFormatError& e) {
      throw ResultFormatError(fmt::format("{}: {}", csv_path, e.what()));
    }
    if (table.rows.empty()) throw ResultFormatError(fmt::format("{}: no rows", csv_path));

    std::optional<ScenarioConfig> cfg;
    if (config) {
      cfg = load(*config).config;
    } else {
      const fs::path meta = fs::path(csv_path).parent_path() / "meta.json";
      if (fs::is_regular_file(meta)) {
        cfg = load(meta.string()).config;
      } else {
        log().warn("no scenario given and no meta.json beside {}; plotting without limit lines", csv_path);
      }
    }
    PlotOptions po;
    if (cfg) {
      if (cfg->nodes != table.nodes) {
        throw ConfigError({fmt::format("scenario has {} nodes, result has {}", cfg->nodes, table.nodes)});
      }
      po.thresholds.assign(cfg->threshold.data(), cfg->threshold.data() + cfg->threshold.size());
      po.control_limits.assign(cfg->u_max.data(), cfg->u_max.data() + cfg->u_max.size());
    }
    write_file(svg_path, plot_svg(table, po));
    out << fmt::format("{} rows -> {}\n", table.rows.size(), svg_path);
    return kExitOk;
  });
}

int cmd_validate(const std::string& source, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    out << normalize(load(source).config);
    return kExitOk;
  });
}

int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    for (const auto& a : opts.axes) {
      auto [key, list] = split_assignment(a);
      std::vector<std::string> values;
      std::string v;
      std::istringstream ss(list);
      while (std::getline(ss, v, ',')) values.push_back(v);
      if (values.empty()) throw ConfigError({fmt::format("{}: no values to sweep", key)});
      axes.emplace_back(key, std::move(values));
    }
    if (axes.empty()) throw ConfigError({"sweep: give at least one --set section.key=v1,v2"});

    const Loaded base = prepare(opts.base);
    const fs::path root(base.config.out_dir);

    struct Job {
      std::string dir;
      std::vector<std::string> values;
      Loaded loaded;
      int code = kExitOk;
      std::string message;
    };
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.second.size();
    std::vector<Job> jobs;
    for (std::size_t k = 0; k < total; ++k) {
      Job job{fmt::format("{:03d}", k), {}, base, kExitOk, ""};
      std::size_t rest = k;
      std::vector<std::size_t> pick(axes.size());
      for (std::size_t a = axes.size(); a-- > 0;) {
        pick[a] = rest % axes[a].second.size();
        rest /= axes[a].second.size();
      }
      for (std::size_t a = 0; a < axes.size(); ++a) {
        const auto& value = axes[a].second[pick[a]];
        apply_override(job.loaded.config, axes[a].first, value);
        job.values.push_back(value);
        job.dir += "_" + sanitize(axes[a].first + "=" + value);
      }
      job.loaded.config.out_dir = (root / job.dir).string();
      jobs.push_back(std::move(job));
    }

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    auto worker = [&] {
      for (std::size_t k = next++; k < jobs.size(); k = next++) {
        std::ostringstream local;
        try {
          auto rep = execute(jobs[k].loaded, opts.base.source, local);
          jobs[k].code = rep.code;
          jobs[k].message = rep.summary;
        } catch (const IoError& e) {
          jobs[k].code = kExitIo;
          jobs[k].message = e.what();
        } catch (const std::exception& e) {
          jobs[k].code = kExitInternal;
          jobs[k].message = e.what();
        }
        std::lock_guard lock(err_mutex);
        const std::string text = local.str();
        if (!text.empty()) err << "[" << jobs[k].dir << "] " << text;
      }
    };
    const int n_threads = std::clamp(opts.jobs, 1, static_cast<int>(jobs.size()));
    std::vector<std::thread> threads;
    for (int t = 1; t < n_threads; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    std::ostringstream index;
    index << "run,dir";
    for (const auto& a : axes) index << ',' << a.first;
    index << ",exit_code\n";
    int code = kExitOk;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      index << k << ',' << jobs[k].dir;
      for (const auto& v : jobs[k].values) index << ',' << v;
      index << ',' << jobs[k].code << '\n';
      out << fmt::format("[{}] exit {}: {}\n", jobs[k].dir, jobs[k].code, jobs[k].message);
      if (code == kExitOk) code = jobs[k].code;
    }
    std::error_code ec;
    fs::create_directories(root, ec);
    write_file(root / "sweep.csv", index.str());
    return code;
  });
}

}  // namespace ccbf
