#include "ccbf/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "ccbf/sis.hpp"

namespace ccbf {

namespace {

// Bundled scenarios. Keep in sync with scenarios/*.cfg.
constexpr std::string_view kSis3Scenario = R"(# Three-node SIS network on a complete graph. Node 1 has the tightest
# infection threshold and needs help from its neighbors to stay below it.

[graph]
nodes = 3
edges = [[1, 2], [1, 3], [2, 1], [2, 3], [3, 1], [3, 2]]

[model]
kind = sis
beta = [
  [0.5, 0.25, 0.25],
  [0.25, 0.5, 0.25],
  [0.25, 0.25, 0.5],
]
gamma = 0.3
u_max = 0.75

[barrier]
threshold = [0.1, 0.12, 0.18]
eta = 3
kappa = 1
udot = backward_difference

[sim]
dt = 0.01
t_final = 100
x0 = [0.04, 0.01, 0.02]
)";

const std::vector<std::pair<std::string, std::vector<std::string>>>& schema() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> s{
      {"graph", {"nodes", "edges"}},
      {"model", {"kind", "beta", "gamma", "u_max"}},
      {"barrier", {"threshold", "eta", "kappa", "udot"}},
      {"sim",
       {"dt", "t_final", "x0", "nominal", "outer_cap", "inner_cap", "trace",
        "continue_on_infeasible", "collaboration", "persist_ledger", "weights"}},
      {"output", {"dir", "formats"}},
  };
  return s;
}

bool known_key(const std::string& section, const std::string& key) {
  for (const auto& [sec, keys] : schema()) {
    if (sec == section) return std::find(keys.begin(), keys.end(), key) != keys.end();
  }
  return false;
}

// ---- lexer -----------------------------------------------------------------

struct Token {
  enum Kind { lbracket, rbracket, comma, equals, newline, word, string, end } kind;
  std::string text;
  int line;
};

std::vector<Token> lex(std::string_view text, std::vector<std::string>& errors) {
  std::vector<Token> out;
  int line = 1;
  std::size_t i = 0;
  auto special = [](char c) {
    return c == '[' || c == ']' || c == ',' || c == '=' || c == '#' || c == '"';
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '\n') {
      out.push_back({Token::newline, "", line++});
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '[') {
      out.push_back({Token::lbracket, "[", line});
      ++i;
    } else if (c == ']') {
      out.push_back({Token::rbracket, "]", line});
      ++i;
    } else if (c == ',') {
      out.push_back({Token::comma, ",", line});
      ++i;
    } else if (c == '=') {
      out.push_back({Token::equals, "=", line});
      ++i;
    } else if (c == '"') {
      std::string s;
      ++i;
      bool closed = false;
      while (i < text.size() && text[i] != '\n') {
        if (text[i] == '"') {
          closed = true;
          ++i;
          break;
        }
        if (text[i] == '\\' && i + 1 < text.size()) {
          const char e = text[i + 1];
          s += e == 'n' ? '\n' : e == 't' ? '\t' : e;
          i += 2;
        } else {
          s += text[i++];
        }
      }
      if (!closed) errors.push_back(fmt::format("line {}: unterminated string", line));
      out.push_back({Token::string, std::move(s), line});
    } else {
      const std::size_t start = i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
             !special(text[i])) {
        ++i;
      }
      out.push_back({Token::word, std::string(text.substr(start, i - start)), line});
    }
  }
  out.push_back({Token::end, "", line});
  return out;
}

ConfigValue word_value(const std::string& w) {
  if (w == "true") return {true};
  if (w == "false") return {false};
  double v = 0.0;
  const char* first = w.data();
  const char* last = w.data() + w.size();
  if (!w.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec == std::errc() && ptr == last) return {v};
  return {w};
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<std::string>& errors)
      : toks_(std::move(tokens)), errors_(errors) {}

  ConfigDocument document() {
    ConfigDocument doc;
    std::string section;
    std::set<std::string> seen_sections;
    while (peek().kind != Token::end) {
      if (peek().kind == Token::newline) {
        ++pos_;
        continue;
      }
      const int line = peek().line;
      if (peek().kind == Token::lbracket) {
        ++pos_;
        if (peek().kind != Token::word) {
          fail(line, "expected a section name after '['");
          continue;
        }
        section = next().text;
        if (!expect(Token::rbracket, "']'")) continue;
        if (!seen_sections.insert(section).second) {
          errors_.push_back(fmt::format("line {}: section [{}] appears twice", line, section));
        }
        doc[section];
        end_of_statement();
        continue;
      }
      if (peek().kind != Token::word) {
        fail(line, fmt::format("unexpected '{}'", peek().text));
        continue;
      }
      const std::string key = next().text;
      if (!expect(Token::equals, "'='")) continue;
      ConfigValue v;
      if (!value(v)) {
        recover();
        continue;
      }
      if (section.empty()) {
        errors_.push_back(fmt::format("line {}: key '{}' appears before any [section]", line, key));
      } else if (!doc[section].emplace(key, std::move(v)).second) {
        errors_.push_back(fmt::format("line {}: {}.{} is set twice", line, section, key));
      }
      end_of_statement();
    }
    return doc;
  }

  bool single_value(ConfigValue& v) {
    if (!value(v)) return false;
    while (peek().kind == Token::newline) ++pos_;
    if (peek().kind != Token::end) {
      fail(peek().line, fmt::format("unexpected '{}' after value", peek().text));
      return false;
    }
    return true;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  void skip_newlines() {
    while (peek().kind == Token::newline) ++pos_;
  }

  void recover() {
    while (peek().kind != Token::newline && peek().kind != Token::end) ++pos_;
  }

  void fail(int line, const std::string& what) {
    errors_.push_back(fmt::format("line {}: {}", line, what));
    recover();
  }

  bool expect(Token::Kind kind, const char* what) {
    if (peek().kind == kind) {
      ++pos_;
      return true;
    }
    fail(peek().line, fmt::format("expected {}", what));
    return false;
  }

  void end_of_statement() {
    if (peek().kind == Token::newline || peek().kind == Token::end) return;
    fail(peek().line, fmt::format("unexpected '{}' at end of line", peek().text));
  }

  bool value(ConfigValue& out) {
    const Token& t = peek();
    switch (t.kind) {
      case Token::word:
        out = word_value(next().text);
        return true;
      case Token::string:
        out = {next().text};
        return true;
      case Token::lbracket: {
        ++pos_;
        std::vector<ConfigValue> items;
        while (true) {
          skip_newlines();
          if (peek().kind == Token::rbracket) {
            ++pos_;
            break;
          }
          ConfigValue item;
          if (!value(item)) return false;
          items.push_back(std::move(item));
          skip_newlines();
          if (peek().kind == Token::comma) {
            ++pos_;
          } else if (peek().kind == Token::rbracket) {
            ++pos_;
            break;
          } else {
            errors_.push_back(fmt::format("line {}: expected ',' or ']' in array", peek().line));
            return false;
          }
        }
        out = {std::move(items)};
        return true;
      }
      default:
        errors_.push_back(fmt::format("line {}: expected a value", t.line));
        return false;
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::string>& errors_;
};

// ---- typed extraction ------------------------------------------------------

class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void error(const std::string& path, const std::string& what) {
    errors_.push_back(fmt::format("{}: {}", path, what));
  }

  std::optional<double> number(const ConfigValue& v, const std::string& path) {
    if (const auto* d = std::get_if<double>(&v.data)) {
      if (!std::isfinite(*d)) {
        error(path, "must be finite");
        return std::nullopt;
      }
      return *d;
    }
    error(path, "expected a number");
    return std::nullopt;
  }

  std::optional<long> integer(const ConfigValue& v, const std::string& path) {
    auto d = number(v, path);
    if (!d) return std::nullopt;
    if (std::floor(*d) != *d || std::abs(*d) > 1e15) {
      error(path, "expected an integer");
      return std::nullopt;
    }
    return static_cast<long>(*d);
  }

  std::optional<bool> boolean(const ConfigValue& v, const std::string& path) {
    if (const auto* b = std::get_if<bool>(&v.data)) return *b;
    error(path, "expected true or false");
    return std::nullopt;
  }

  std::optional<std::string> string(const ConfigValue& v, const std::string& path) {
    if (const auto* s = std::get_if<std::string>(&v.data)) return *s;
    error(path, "expected a string");
    return std::nullopt;
  }

  const std::vector<ConfigValue>* array(const ConfigValue& v, const std::string& path) {
    if (const auto* a = std::get_if<std::vector<ConfigValue>>(&v.data)) return a;
    error(path, "expected an array");
    return nullptr;
  }

  // A scalar applies to every node.
  std::optional<Vec> per_node(const ConfigValue& v, const std::string& path, std::size_t n) {
    if (std::holds_alternative<double>(v.data)) {
      auto d = number(v, path);
      if (!d) return std::nullopt;
      return Vec::Constant(static_cast<Eigen::Index>(n), *d);
    }
    const auto* a = std::get_if<std::vector<ConfigValue>>(&v.data);
    if (a == nullptr) {
      error(path, "expected a number or an array of numbers");
      return std::nullopt;
    }
    if (a->size() != n) {
      error(path, fmt::format("expected {} entries, got {}", n, a->size()));
      return std::nullopt;
    }
    Vec out(static_cast<Eigen::Index>(n));
    bool ok = true;
    for (std::size_t k = 0; k < n; ++k) {
      auto d = number((*a)[k], fmt::format("{}[{}]", path, k));
      if (d) {
        out(static_cast<Eigen::Index>(k)) = *d;
      } else {
        ok = false;
      }
    }
    return ok ? std::optional<Vec>(out) : std::nullopt;
  }

 private:
  std::vector<std::string>& errors_;
};

const ConfigValue* find(const ConfigDocument& doc, const std::string& section,
                        const std::string& key) {
  auto s = doc.find(section);
  if (s == doc.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

ScenarioConfig from_document(const ConfigDocument& doc) {
  std::vector<std::string> errors;
  Reader rd(errors);
  ScenarioConfig c;

  for (const auto& [section, keys] : doc) {
    for (const auto& [key, v] : keys) {
      if (!known_key(section, key)) rd.error(section + "." + key, "unknown key");
    }
  }

  auto required = [&](const char* section, const char* key) -> const ConfigValue* {
    const ConfigValue* v = find(doc, section, key);
    if (v == nullptr) rd.error(fmt::format("{}.{}", section, key), "missing required key");
    return v;
  };
  auto optional = [&](const char* section, const char* key) { return find(doc, section, key); };

  bool have_n = false;
  if (const auto* v = required("graph", "nodes")) {
    if (auto n = rd.integer(*v, "graph.nodes")) {
      if (*n < 1) {
        rd.error("graph.nodes", "must be at least 1");
      } else {
        c.nodes = static_cast<std::size_t>(*n);
        have_n = true;
      }
    }
  }
  const std::size_t n = c.nodes;

  if (const auto* v = required("graph", "edges")) {
    if (const auto* list = rd.array(*v, "graph.edges")) {
      for (std::size_t k = 0; k < list->size(); ++k) {
        const std::string path = fmt::format("graph.edges[{}]", k);
        const auto* pair = rd.array((*list)[k], path);
        if (pair == nullptr) continue;
        if (pair->size() != 2) {
          rd.error(path, "expected [from, to]");
          continue;
        }
        auto from = rd.integer((*pair)[0], path + "[0]");
        auto to = rd.integer((*pair)[1], path + "[1]");
        if (!from || !to) continue;
        if (have_n && (*from < 1 || *to < 1 || *from > static_cast<long>(n) ||
                       *to > static_cast<long>(n))) {
          rd.error(path, fmt::format("node ids must lie in 1..{}", n));
          continue;
        }
        c.edges.push_back({static_cast<NodeId>(*from - 1), static_cast<NodeId>(*to - 1)});
      }
    }
  }

  if (const auto* v = optional("model", "kind")) {
    if (auto s = rd.string(*v, "model.kind")) c.kind = *s;
  }
  if (const auto* v = required("model", "beta"); v && have_n) {
    if (const auto* rows = rd.array(*v, "model.beta")) {
      if (rows->size() != n) {
        rd.error("model.beta", fmt::format("expected {} rows, got {}", n, rows->size()));
      } else {
        c.beta = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
          const std::string path = fmt::format("model.beta[{}]", i);
          const auto* row = rd.array((*rows)[i], path);
          if (row == nullptr) continue;
          if (row->size() != n) {
            rd.error(path, fmt::format("expected {} entries, got {}", n, row->size()));
            continue;
          }
          for (std::size_t j = 0; j < n; ++j) {
            if (auto d = rd.number((*row)[j], fmt::format("{}[{}]", path, j))) {
              c.beta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *d;
            }
          }
        }
      }
    }
  }

  auto node_vec = [&](const char* section, const char* key, bool req, Vec& out) {
    const ConfigValue* v = req ? required(section, key) : optional(section, key);
    if (v == nullptr || !have_n) return;
    if (auto vec = rd.per_node(*v, fmt::format("{}.{}", section, key), n)) out = std::move(*vec);
  };
  node_vec("model", "gamma", true, c.gamma);
  node_vec("model", "u_max", true, c.u_max);
  node_vec("barrier", "threshold", true, c.threshold);
  if (have_n) {
    c.eta = Vec::Ones(static_cast<Eigen::Index>(n));
    c.kappa = Vec::Ones(static_cast<Eigen::Index>(n));
    c.nominal = Vec::Zero(static_cast<Eigen::Index>(n));
  }
  node_vec("barrier", "eta", false, c.eta);
  node_vec("barrier", "kappa", false, c.kappa);
  if (const auto* v = optional("barrier", "udot")) {
    if (auto s = rd.string(*v, "barrier.udot")) {
      try {
        c.udot = parse_udot_policy(*s);
      } catch (const Error&) {
        rd.error("barrier.udot", fmt::format("unknown policy '{}' (zero, backward_difference)", *s));
      }
    }
  }

  if (const auto* v = optional("sim", "dt")) {
    if (auto d = rd.number(*v, "sim.dt")) c.dt = *d;
  }
  if (const auto* v = optional("sim", "t_final")) {
    if (auto d = rd.number(*v, "sim.t_final")) c.t_final = *d;
  }
  node_vec("sim", "x0", true, c.x0);
  node_vec("sim", "nominal", false, c.nominal);
  auto cap = [&](const char* key, int& out) {
    if (const auto* v = optional("sim", key)) {
      if (auto d = rd.integer(*v, fmt::format("sim.{}", key))) {
        out = static_cast<int>(std::clamp<long>(*d, -1, 1L << 30));
      }
    }
  };
  cap("outer_cap", c.outer_cap);
  cap("inner_cap", c.inner_cap);
  auto flag = [&](const char* key, bool& out) {
    if (const auto* v = optional("sim", key)) {
      if (auto b = rd.boolean(*v, fmt::format("sim.{}", key))) out = *b;
    }
  };
  flag("trace", c.trace);
  flag("continue_on_infeasible", c.continue_on_infeasible);
  flag("collaboration", c.collaboration);
  flag("persist_ledger", c.persist_ledger);
  if (const auto* v = optional("sim", "weights")) {
    if (auto s = rd.string(*v, "sim.weights")) {
      try {
        c.weights = parse_weight_rule(*s);
      } catch (const Error&) {
        rd.error("sim.weights", fmt::format("unknown rule '{}' (abs_coupling, uniform)", *s));
      }
    }
  }

  if (const auto* v = optional("output", "dir")) {
    if (auto s = rd.string(*v, "output.dir")) c.out_dir = *s;
  }
  if (const auto* v = optional("output", "formats")) {
    if (const auto* list = rd.array(*v, "output.formats")) {
      c.formats.clear();
      for (std::size_t k = 0; k < list->size(); ++k) {
        if (auto s = rd.string((*list)[k], fmt::format("output.formats[{}]", k))) {
          c.formats.push_back(*s);
        }
      }
    }
  }

  // Semantic checks too, minus anything under a path already reported.
  std::vector<std::string> reported;
  for (const auto& e : errors) reported.push_back(e.substr(0, e.find(':')));
  for (auto& e : validate(c)) {
    const std::string path = e.substr(0, e.find(':'));
    const bool covered = std::any_of(reported.begin(), reported.end(),
                                     [&](const std::string& r) { return path.rfind(r, 0) == 0; });
    if (!covered) errors.push_back(std::move(e));
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

bool same(const Vec& a, const Vec& b) { return a.size() == b.size() && (a.array() == b.array()).all(); }
bool same(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

ConfigValue vec_value(const Vec& v) {
  std::vector<ConfigValue> items;
  for (Eigen::Index k = 0; k < v.size(); ++k) items.push_back({v(k)});
  return {std::move(items)};
}

std::string render(const ConfigValue& v);

std::string render_inline(const std::vector<ConfigValue>& items) {
  std::string s = "[";
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k) s += ", ";
    s += render(items[k]);
  }
  return s + "]";
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string render(const ConfigValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_number(x);
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return quote(x);
        } else {
          return render_inline(x);
        }
      },
      v.data);
}

// Arrays of arrays that would make a long line go one row per line.
std::string render_entry(const std::string& key, const ConfigValue& v) {
  const std::string flat = render(v);
  const auto* items = std::get_if<std::vector<ConfigValue>>(&v.data);
  const bool nested = items && !items->empty() &&
                      std::all_of(items->begin(), items->end(), [](const ConfigValue& e) {
                        return std::holds_alternative<std::vector<ConfigValue>>(e.data);
                      });
  if (!nested || key.size() + 3 + flat.size() <= 80) return key + " = " + flat + "\n";
  std::string s = key + " = [\n";
  for (const auto& row : *items) s += "  " + render(row) + ",\n";
  return s + "]\n";
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : Error([&] {
        std::string s = "invalid scenario:";
        for (const auto& i : issues) s += "\n  " + i;
        return s;
      }()),
      issues_(std::move(issues)) {}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

ConfigDocument parse_document(std::string_view text) {
  std::vector<std::string> errors;
  auto tokens = lex(text, errors);
  Parser p(std::move(tokens), errors);
  auto doc = p.document();
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return doc;
}

ConfigValue parse_value(std::string_view text) {
  std::vector<std::string> errors;
  auto tokens = lex(text, errors);
  Parser p(std::move(tokens), errors);
  ConfigValue v;
  p.single_value(v);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return v;
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  return a.nodes == b.nodes && a.edges == b.edges && a.kind == b.kind && same(a.beta, b.beta) &&
         same(a.gamma, b.gamma) && same(a.u_max, b.u_max) && same(a.threshold, b.threshold) &&
         same(a.eta, b.eta) && same(a.kappa, b.kappa) && a.udot == b.udot && a.dt == b.dt &&
         a.t_final == b.t_final && same(a.x0, b.x0) && same(a.nominal, b.nominal) &&
         a.outer_cap == b.outer_cap && a.inner_cap == b.inner_cap && a.trace == b.trace &&
         a.continue_on_infeasible == b.continue_on_infeasible &&
         a.collaboration == b.collaboration && a.persist_ledger == b.persist_ledger &&
         a.weights == b.weights && a.out_dir == b.out_dir && a.formats == b.formats;
}

std::vector<std::string> validate(const ScenarioConfig& c) {
  std::vector<std::string> out;
  auto err = [&](const std::string& path, const std::string& what) {
    out.push_back(fmt::format("{}: {}", path, what));
  };
  const auto n = static_cast<Eigen::Index>(c.nodes);
  if (c.nodes < 1) err("graph.nodes", "must be at least 1");

  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::size_t k = 0; k < c.edges.size(); ++k) {
    const auto& e = c.edges[k];
    const std::string path = fmt::format("graph.edges[{}]", k);
    if (e.from >= c.nodes || e.to >= c.nodes) {
      err(path, fmt::format("node ids must lie in 1..{}", c.nodes));
    } else if (e.from == e.to) {
      err(path, "self-loop; on-node coupling belongs on the beta diagonal");
    } else if (!seen.insert({e.from, e.to}).second) {
      err(path, "duplicate edge");
    }
  }

  if (c.kind != "sis") err("model.kind", fmt::format("unsupported model '{}' (sis)", c.kind));
  if (c.beta.rows() != n || c.beta.cols() != n) {
    err("model.beta", fmt::format("expected a {}x{} matrix", n, n));
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const std::string path = fmt::format("model.beta[{}][{}]", i, j);
        const double b = c.beta(i, j);
        if (!(b >= 0.0)) {
          err(path, "must be nonnegative");
          continue;
        }
        if (i == j) continue;
        const bool edge = seen.count({static_cast<NodeId>(j), static_cast<NodeId>(i)}) > 0;
        if (edge && b == 0.0) {
          err(path, fmt::format("is zero but edge [{}, {}] exists", j + 1, i + 1));
        } else if (!edge && b > 0.0) {
          err(path, fmt::format("is positive but there is no edge [{}, {}]", j + 1, i + 1));
        }
      }
    }
  }

  auto each = [&](const Vec& v, const char* path, auto ok, const char* what) {
    if (v.size() != n) {
      err(path, fmt::format("expected {} entries, got {}", n, v.size()));
      return;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!ok(v(i))) err(fmt::format("{}[{}]", path, i), what);
    }
  };
  each(c.gamma, "model.gamma", [](double v) { return v > 0.0; }, "must be positive");
  each(c.u_max, "model.u_max", [](double v) { return v > 0.0; }, "must be positive");
  each(c.threshold, "barrier.threshold", [](double v) { return v > 0.0 && v <= 1.0; },
       "must lie in (0, 1]");
  each(c.eta, "barrier.eta", [](double v) { return v >= 0.0; }, "must be nonnegative");
  each(c.kappa, "barrier.kappa", [](double v) { return v >= 0.0; }, "must be nonnegative");
  each(c.x0, "sim.x0", [](double v) { return v >= 0.0 && v <= 1.0; }, "must lie in [0, 1]");
  each(c.nominal, "sim.nominal", [](double v) { return std::isfinite(v); }, "must be finite");

  if (!(c.dt > 0.0)) err("sim.dt", "must be positive");
  if (!(c.t_final > c.dt)) err("sim.t_final", "must exceed sim.dt");
  if (c.dt > 0.0 && c.t_final / c.dt > 1e8) err("sim.t_final", "more than 1e8 steps");
  if (c.outer_cap < 1) err("sim.outer_cap", "must be at least 1");
  if (c.inner_cap < 1) err("sim.inner_cap", "must be at least 1");
  if (c.out_dir.empty()) err("output.dir", "must not be empty");
  for (std::size_t k = 0; k < c.formats.size(); ++k) {
    if (c.formats[k] != "csv" && c.formats[k] != "svg") {
      err(fmt::format("output.formats[{}]", k), fmt::format("unknown format '{}' (csv, svg)", c.formats[k]));
    }
  }
  return out;
}

ScenarioConfig parse_config(std::string_view text) { return from_document(parse_document(text)); }

ConfigDocument to_document(const ScenarioConfig& c) {
  ConfigDocument doc;
  std::vector<ConfigValue> edges;
  for (const auto& e : c.edges) {
    edges.push_back({std::vector<ConfigValue>{{static_cast<double>(e.from + 1)},
                                              {static_cast<double>(e.to + 1)}}});
  }
  doc["graph"]["nodes"] = {static_cast<double>(c.nodes)};
  doc["graph"]["edges"] = {std::move(edges)};

  std::vector<ConfigValue> rows;
  for (Eigen::Index i = 0; i < c.beta.rows(); ++i) rows.push_back(vec_value(c.beta.row(i).transpose()));
  doc["model"]["kind"] = {c.kind};
  doc["model"]["beta"] = {std::move(rows)};
  doc["model"]["gamma"] = vec_value(c.gamma);
  doc["model"]["u_max"] = vec_value(c.u_max);

  doc["barrier"]["threshold"] = vec_value(c.threshold);
  doc["barrier"]["eta"] = vec_value(c.eta);
  doc["barrier"]["kappa"] = vec_value(c.kappa);
  doc["barrier"]["udot"] = {std::string(to_string(c.udot))};

  auto& sim = doc["sim"];
  sim["dt"] = {c.dt};
  sim["t_final"] = {c.t_final};
  sim["x0"] = vec_value(c.x0);
  sim["nominal"] = vec_value(c.nominal);
  sim["outer_cap"] = {static_cast<double>(c.outer_cap)};
  sim["inner_cap"] = {static_cast<double>(c.inner_cap)};
  sim["trace"] = {c.trace};
  sim["continue_on_infeasible"] = {c.continue_on_infeasible};
  sim["collaboration"] = {c.collaboration};
  sim["persist_ledger"] = {c.persist_ledger};
  sim["weights"] = {std::string(to_string(c.weights))};

  std::vector<ConfigValue> formats;
  for (const auto& f : c.formats) formats.push_back({f});
  doc["output"]["dir"] = {c.out_dir};
  doc["output"]["formats"] = {std::move(formats)};
  return doc;
}

std::string dump(const ConfigDocument& doc) {
  std::string out;
  auto emit_section = [&](const std::string& name, const std::map<std::string, ConfigValue>& keys,
                          const std::vector<std::string>& order) {
    if (!out.empty()) out += "\n";
    out += "[" + name + "]\n";
    for (const auto& k : order) {
      auto it = keys.find(k);
      if (it != keys.end()) out += render_entry(k, it->second);
    }
    for (const auto& [k, v] : keys) {
      if (std::find(order.begin(), order.end(), k) == order.end()) out += render_entry(k, v);
    }
  };
  for (const auto& [section, order] : schema()) {
    auto it = doc.find(section);
    if (it != doc.end()) emit_section(section, it->second, order);
  }
  for (const auto& [section, keys] : doc) {
    const bool known = std::any_of(schema().begin(), schema().end(),
                                   [&](const auto& s) { return s.first == section; });
    if (!known) emit_section(section, keys, {});
  }
  return out;
}

std::string normalize(const ScenarioConfig& config) { return dump(to_document(config)); }

void apply_override(ScenarioConfig& config, std::string_view key, std::string_view value) {
  const auto dot = key.find('.');
  const std::string section(key.substr(0, dot));
  const std::string name(dot == std::string_view::npos ? "" : key.substr(dot + 1));
  if (dot == std::string_view::npos || !known_key(section, name)) {
    throw ConfigError({fmt::format("{}: unknown key", key)});
  }
  ConfigDocument doc = to_document(config);
  try {
    doc[section][name] = parse_value(value);
  } catch (const ConfigError& e) {
    std::vector<std::string> issues;
    for (const auto& i : e.issues()) issues.push_back(fmt::format("{}: {}", key, i));
    throw ConfigError(std::move(issues));
  }
  config = from_document(doc);
}

std::vector<std::string> bundled_scenarios() { return {"paper_sis3"}; }

std::string_view bundled_scenario(std::string_view name) {
  if (name == "paper_sis3") return kSis3Scenario;
  return {};
}

ScenarioConfig load_config(const std::string& source) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(source, ec)) {
    std::ifstream in(source, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", source));
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError(fmt::format("error reading '{}'", source));
    return parse_config(ss.str());
  }
  const auto text = bundled_scenario(source);
  if (text.empty()) {
    throw IoError(fmt::format("'{}' is neither a readable file nor a bundled scenario", source));
  }
  return parse_config(text);
}

Scenario build_scenario(const ScenarioConfig& c) {
  auto issues = validate(c);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  NetworkGraph graph = NetworkGraph::build(c.nodes, c.edges);
  SisParams params{c.beta, c.gamma, c.u_max};

  Scenario s;
  s.model = std::make_shared<SisModel>(std::move(graph), std::move(params));
  for (std::size_t i = 0; i < c.nodes; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    s.boxes.push_back(Box::interval(0.0, c.u_max(k)));
    s.barriers.push_back({c.threshold(k), c.eta(k), c.kappa(k)});
    s.x0.push_back(Vec::Constant(1, c.x0(k)));
    s.nominal.push_back(Vec::Constant(1, c.nominal(k)));
  }
  s.sim.dt = c.dt;
  s.sim.t_final = c.t_final;
  s.sim.udot = c.udot;
  s.sim.protocol.outer_cap = c.outer_cap;
  s.sim.protocol.inner_cap = c.inner_cap;
  s.sim.protocol.weights = c.weights;
  s.sim.collaboration = c.collaboration;
  s.sim.continue_on_infeasible = c.continue_on_infeasible;
  s.sim.persist_ledger = c.persist_ledger;
  return s;
}

}  // namespace ccbf
