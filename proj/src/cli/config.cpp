#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <sstream>

#include "sspec/cli.hpp"
#include "sspec/error.hpp"

namespace sspec::cli {

using nlohmann::json;

std::string ConfigError::format() const {
  std::ostringstream os;
  if (line > 0) os << "line " << line << ": ";
  os << (pointer.empty() ? "/" : pointer) << ": " << message;
  return os.str();
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char ch : key) {
    if (ch == '~') out += "~0";
    else if (ch == '/') out += "~1";
    else out += ch;
  }
  return out;
}

// Walks text that nlohmann already accepted, recording the line on which
// each value starts.
class LineScanner {
 public:
  LineScanner(const std::string& s, std::map<std::string, int>& out) : s_(s), out_(out) {}

  void value(const std::string& ptr) {
    skip();
    out_[ptr] = line_;
    if (i_ >= s_.size()) return;
    const char ch = s_[i_];
    if (ch == '{') {
      ++i_;
      skip();
      if (peek() == '}') { ++i_; return; }
      while (i_ < s_.size()) {
        skip();
        const std::string key = string();
        skip();
        ++i_;  // ':'
        value(ptr + "/" + escape_token(key));
        skip();
        if (peek() == ',') { ++i_; continue; }
        ++i_;  // '}'
        return;
      }
    } else if (ch == '[') {
      ++i_;
      skip();
      if (peek() == ']') { ++i_; return; }
      for (int idx = 0; i_ < s_.size(); ++idx) {
        value(ptr + "/" + std::to_string(idx));
        skip();
        if (peek() == ',') { ++i_; continue; }
        ++i_;
        return;
      }
    } else if (ch == '"') {
      string();
    } else {
      while (i_ < s_.size() && !std::strchr(",}] \t\r\n", s_[i_])) ++i_;
    }
  }

 private:
  char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
      if (s_[i_] == '\n') ++line_;
      ++i_;
    }
  }

  // Raw contents; escapes are kept verbatim apart from \" and \\, which is
  // enough for object keys.
  std::string string() {
    std::string out;
    ++i_;
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
        out += s_[i_ + 1];
        i_ += 2;
        continue;
      }
      out += s_[i_++];
    }
    ++i_;
    return out;
  }

  const std::string& s_;
  std::map<std::string, int>& out_;
  std::size_t i_ = 0;
  int line_ = 1;
};

std::string spaced(std::string key) {
  std::replace(key.begin(), key.end(), '_', ' ');
  return key;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

struct Range {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;
  bool hi_open = false;

  static Range positive() { return {0.0, std::numeric_limits<double>::infinity(), true, false}; }
  static Range nonnegative() { return {0.0, std::numeric_limits<double>::infinity(), false, false}; }
  static Range closed(double a, double b) { return {a, b, false, false}; }
  static Range open(double a, double b) { return {a, b, true, true}; }

  bool contains(double v) const {
    if (!std::isfinite(v)) return false;
    if (lo_open ? !(v > lo) : !(v >= lo)) return false;
    if (hi_open ? !(v < hi) : !(v <= hi)) return false;
    return true;
  }

  // "grid step must be > 0", "rho must be in (0, 1)"
  std::string message(const std::string& key) const {
    const bool has_lo = std::isfinite(lo);
    const bool has_hi = std::isfinite(hi);
    if (has_lo && !has_hi) return spaced(key) + " must be " + (lo_open ? "> " : ">= ") + fmt(lo);
    if (!has_lo && has_hi) return spaced(key) + " must be " + (hi_open ? "< " : "<= ") + fmt(hi);
    if (!has_lo && !has_hi) return spaced(key) + " must be finite";
    return spaced(key) + " must be in " + (lo_open ? "(" : "[") + fmt(lo) + ", " + fmt(hi) + (hi_open ? ")" : "]");
  }
};

class Checker {
 public:
  Checker(std::map<std::string, int> lines, std::vector<ConfigError>& errors)
      : lines_(std::move(lines)), errors_(errors) {}

  void error(const std::string& ptr, const std::string& message) {
    int line = 0;
    // Nearest ancestor with a known line (missing keys point at their parent).
    for (std::string p = ptr;; p = p.substr(0, p.rfind('/'))) {
      const auto it = lines_.find(p);
      if (it != lines_.end()) { line = it->second; break; }
      if (p.empty()) break;
    }
    errors_.push_back({ptr, line, message});
  }

  /// Object check plus unknown-key report. Returns false if not an object.
  bool object(const json& j, const std::string& ptr, const std::vector<std::string>& allowed) {
    if (!j.is_object()) {
      error(ptr, "expected an object");
      return false;
    }
    for (const auto& [key, value] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
      std::string best;
      std::size_t best_d = std::numeric_limits<std::size_t>::max();
      for (const auto& a : allowed) {
        const std::size_t d = edit_distance(key, a);
        if (d < best_d) { best_d = d; best = a; }
      }
      std::string msg = "unknown key '" + key + "'";
      if (!best.empty()) msg += "; did you mean '" + best + "'?";
      error(ptr + "/" + escape_token(key), msg);
    }
    return true;
  }

  const json* member(const json& obj, const std::string& key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  double number(const json& obj, const std::string& ptr, const std::string& key, std::optional<double> fallback,
                Range range = {}) {
    const json* v = member(obj, key);
    const std::string at = ptr + "/" + key;
    if (!v) {
      if (!fallback) error(ptr, "missing required key '" + key + "'");
      return fallback.value_or(0.0);
    }
    if (!v->is_number()) {
      error(at, spaced(key) + " must be a number");
      return fallback.value_or(0.0);
    }
    const double x = v->get<double>();
    if (!range.contains(x)) error(at, range.message(key));
    return x;
  }

  std::optional<double> optional_number(const json& obj, const std::string& ptr, const std::string& key,
                                        Range range = {}) {
    if (!member(obj, key)) return std::nullopt;
    return number(obj, ptr, key, 0.0, range);
  }

  std::int64_t integer(const json& obj, const std::string& ptr, const std::string& key,
                       std::optional<std::int64_t> fallback, std::int64_t lo, std::int64_t hi) {
    const json* v = member(obj, key);
    const std::string at = ptr + "/" + key;
    if (!v) {
      if (!fallback) error(ptr, "missing required key '" + key + "'");
      return fallback.value_or(lo);
    }
    if (!v->is_number_integer()) {
      error(at, spaced(key) + " must be an integer");
      return fallback.value_or(lo);
    }
    const std::int64_t x = v->is_number_unsigned() && v->get<std::uint64_t>() > static_cast<std::uint64_t>(hi)
                               ? hi + 1
                               : v->get<std::int64_t>();
    if (x < lo || x > hi) {
      error(at, spaced(key) + " must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return fallback.value_or(lo);
    }
    return x;
  }

  bool boolean(const json& obj, const std::string& ptr, const std::string& key, bool fallback) {
    const json* v = member(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) {
      error(ptr + "/" + key, spaced(key) + " must be true or false");
      return fallback;
    }
    return v->get<bool>();
  }

  std::string choice(const json& obj, const std::string& ptr, const std::string& key,
                     const std::vector<std::string>& options, std::optional<std::string> fallback) {
    const json* v = member(obj, key);
    if (!v) {
      if (!fallback) error(ptr, "missing required key '" + key + "'");
      return fallback.value_or("");
    }
    if (!v->is_string() || std::find(options.begin(), options.end(), v->get<std::string>()) == options.end()) {
      std::string list;
      for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
      error(ptr + "/" + key, spaced(key) + " must be one of: " + list);
      return "";
    }
    return v->get<std::string>();
  }

  std::optional<Matrix> matrix(const json& j, const std::string& ptr) {
    if (!j.is_array() || j.empty()) {
      error(ptr, "matrix must be a non-empty list of rows");
      return std::nullopt;
    }
    const std::size_t d = j.size();
    Matrix m(d, d);
    bool ok = true;
    for (std::size_t i = 0; i < d; ++i) {
      const std::string row = ptr + "/" + std::to_string(i);
      if (!j[i].is_array() || j[i].size() != d) {
        error(row, "matrix must be square: expected " + std::to_string(d) + " entries");
        ok = false;
        continue;
      }
      for (std::size_t k = 0; k < d; ++k) {
        if (!j[i][k].is_number() || !std::isfinite(j[i][k].get<double>())) {
          error(row + "/" + std::to_string(k), "matrix entries must be finite numbers");
          ok = false;
          continue;
        }
        m(i, k) = j[i][k].get<double>();
      }
    }
    if (!ok) return std::nullopt;
    return m;
  }

  std::vector<double> numbers(const json& obj, const std::string& ptr, const std::string& key, Range range,
                              bool required) {
    const json* v = member(obj, key);
    std::vector<double> out;
    if (!v) {
      if (required) error(ptr, "missing required key '" + key + "'");
      return out;
    }
    if (!v->is_array() || v->empty()) {
      error(ptr + "/" + key, spaced(key) + " must be a non-empty list of numbers");
      return out;
    }
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& x = (*v)[i];
      if (!x.is_number() || !range.contains(x.get<double>())) {
        error(ptr + "/" + key + "/" + std::to_string(i),
              x.is_number() ? range.message(key) : spaced(key) + " entries must be numbers");
        continue;
      }
      out.push_back(x.get<double>());
    }
    return out;
  }

 private:
  std::map<std::string, int> lines_;
  std::vector<ConfigError>& errors_;
};

const std::vector<std::string> kCommands = {"lyapunov", "spectrum", "quasicompact", "verify-jps", "selftest"};

// Symbols of a word string such as "0110".
std::optional<std::vector<Symbol>> word_symbols(const json& j, int alphabet) {
  std::vector<Symbol> out;
  if (j.is_string()) {
    for (char ch : j.get<std::string>()) {
      if (!std::isdigit(static_cast<unsigned char>(ch)) || ch - '0' >= alphabet) return std::nullopt;
      out.push_back(static_cast<Symbol>(ch - '0'));
    }
  } else if (j.is_array()) {
    for (const auto& x : j) {
      if (!x.is_number_integer() || x.get<int>() < 0 || x.get<int>() >= alphabet) return std::nullopt;
      out.push_back(static_cast<Symbol>(x.get<int>()));
    }
  } else {
    return std::nullopt;
  }
  if (out.empty()) return std::nullopt;
  return out;
}

std::optional<BaseSystem> read_base(Checker& ck, const json& doc) {
  const json* b = ck.member(doc, "base");
  if (!b) {
    ck.error("", "missing required key 'base'");
    return std::nullopt;
  }
  if (!b->is_object()) {
    ck.error("/base", "expected an object");
    return std::nullopt;
  }
  const std::string type = ck.choice(*b, "/base", "type", {"full_shift", "circle_rotation", "finite_periodic"}, {});
  if (type == "full_shift") {
    ck.object(*b, "/base", {"type", "alphabet"});
    return BaseSystem::full_shift(static_cast<int>(ck.integer(*b, "/base", "alphabet", 2, 1, 10)));
  }
  if (type == "circle_rotation") {
    ck.object(*b, "/base", {"type", "rho"});
    const double rho = ck.number(*b, "/base", "rho", {}, Range::open(0.0, 1.0));
    if (!(rho > 0.0 && rho < 1.0)) return std::nullopt;
    return BaseSystem::circle_rotation(rho);
  }
  if (type == "finite_periodic") {
    ck.object(*b, "/base", {"type", "period"});
    return BaseSystem::finite_periodic(static_cast<int>(ck.integer(*b, "/base", "period", 1, 1, 100000)));
  }
  ck.object(*b, "/base", {"type", "alphabet", "rho", "period"});
  return std::nullopt;
}

std::optional<NoncompactnessModel> read_model(Checker& ck, const json& doc, bool& ok) {
  const json* m = ck.member(doc, "operator_model");
  if (!m) return std::nullopt;
  const std::string p = "/operator_model";
  if (!m->is_object()) {
    ck.error(p, "expected an object");
    ok = false;
    return std::nullopt;
  }
  const std::string type = ck.choice(*m, p, "type", {"finite_dim", "diagonal", "banded"}, {});
  if (type == "finite_dim") {
    ck.object(*m, p, {"type"});
    return std::nullopt;  // the dimension comes from the generator
  }
  if (type == "diagonal") {
    ck.object(*m, p, {"type", "weights", "parameter", "lead", "truncation"});
    const std::string family = ck.choice(*m, p, "weights", {"half_plus_inv_k", "const_plus_inv_k", "geometric", "power"},
                                         std::string("half_plus_inv_k"));
    const double parameter = ck.number(*m, p, "parameter", 0.0);
    const auto lead = ck.optional_number(*m, p, "lead");
    const int n = static_cast<int>(ck.integer(*m, p, "truncation", {}, 1, 4096));
    if (family.empty()) { ok = false; return std::nullopt; }
    try {
      return NoncompactnessModel::diagonal(WeightSequence::make(family, parameter, lead), n);
    } catch (const Error& e) {
      ck.error(p, e.what());
      ok = false;
      return std::nullopt;
    }
  }
  if (type == "banded") {
    ck.object(*m, p, {"type", "truncation", "tail_norm"});
    const int n = static_cast<int>(ck.integer(*m, p, "truncation", {}, 1, 4096));
    const double tail = ck.number(*m, p, "tail_norm", {}, Range::nonnegative());
    try {
      return NoncompactnessModel::banded(n, tail);
    } catch (const Error& e) {
      ck.error(p, e.what());
      ok = false;
      return std::nullopt;
    }
  }
  ok = false;
  return std::nullopt;
}

int ipow(int b, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) {
    r *= b;
    if (r > (1 << 20)) return -1;
  }
  return static_cast<int>(r);
}

std::optional<CocycleGenerator> read_generator(Checker& ck, const json& doc, const std::optional<BaseSystem>& base,
                                               const std::optional<NoncompactnessModel>& model) {
  const json* g = ck.member(doc, "generator");
  const std::string p = "/generator";
  if (!g) {
    ck.error("", "missing required key 'generator'");
    return std::nullopt;
  }
  if (!g->is_object()) {
    ck.error(p, "expected an object");
    return std::nullopt;
  }
  const std::string type = ck.choice(*g, p, "type",
                                     {"constant", "symbol", "scalar_symbol", "rotation_scaled", "diagonal_operator"}, {});
  const int symbols = base ? base->symbol_count() : 0;
  auto need_symbols = [&]() {
    if (base && symbols == 0) ck.error(p, "generator type '" + type + "' needs a shift or finite periodic base");
    return base && symbols > 0;
  };

  try {
    if (type == "constant") {
      ck.object(*g, p, {"type", "matrix"});
      const json* m = ck.member(*g, "matrix");
      if (!m) {
        ck.error(p, "missing required key 'matrix'");
        return std::nullopt;
      }
      auto mat = ck.matrix(*m, p + "/matrix");
      if (!mat) return std::nullopt;
      return CocycleGenerator::constant(*mat);
    }
    if (type == "symbol") {
      ck.object(*g, p, {"type", "matrices", "block"});
      const int block = static_cast<int>(ck.integer(*g, p, "block", 1, 1, 16));
      const json* ms = ck.member(*g, "matrices");
      if (!ms || !ms->is_array() || ms->empty()) {
        ck.error(ms ? p + "/matrices" : p, "matrices must be a non-empty list of matrices");
        return std::nullopt;
      }
      std::vector<Matrix> mats;
      bool ok = true;
      for (std::size_t i = 0; i < ms->size(); ++i) {
        auto mat = ck.matrix((*ms)[i], p + "/matrices/" + std::to_string(i));
        if (!mat) { ok = false; continue; }
        if (!mats.empty() && mat->rows() != mats.front().rows()) {
          ck.error(p + "/matrices/" + std::to_string(i), "all matrices must have the same dimension");
          ok = false;
          continue;
        }
        mats.push_back(*mat);
      }
      if (!ok || !need_symbols()) return std::nullopt;
      const int expected = ipow(symbols, block);
      if (static_cast<int>(mats.size()) != expected) {
        ck.error(p + "/matrices", "expected " + std::to_string(expected) + " matrices (symbols^block), got " +
                                      std::to_string(mats.size()));
        return std::nullopt;
      }
      return CocycleGenerator::symbol_dependent(mats, symbols, block);
    }
    if (type == "scalar_symbol") {
      ck.object(*g, p, {"type", "exponents", "block", "overrides"});
      const int block = static_cast<int>(ck.integer(*g, p, "block", 1, 1, 16));
      const auto exps = ck.numbers(*g, p, "exponents", Range{}, true);
      if (exps.empty() || !need_symbols()) return std::nullopt;
      if (static_cast<int>(exps.size()) != symbols) {
        ck.error(p + "/exponents", "expected one exponent per symbol (" + std::to_string(symbols) + ")");
        return std::nullopt;
      }
      const int words = ipow(symbols, block);
      if (words < 0) {
        ck.error(p + "/block", "symbols^block too large");
        return std::nullopt;
      }
      std::vector<double> value(words);
      for (int w = 0; w < words; ++w) value[w] = exps[w / ipow(symbols, block - 1)];
      if (const json* ov = ck.member(*g, "overrides")) {
        if (!ov->is_object()) {
          ck.error(p + "/overrides", "overrides must map words to exponents");
        } else {
          for (const auto& [word, v] : ov->items()) {
            const std::string at = p + "/overrides/" + escape_token(word);
            const auto syms = word_symbols(json(word), symbols);
            if (!syms || static_cast<int>(syms->size()) != block) {
              ck.error(at, "override word '" + word + "' must have " + std::to_string(block) + " symbols below " +
                               std::to_string(symbols));
              continue;
            }
            if (!v.is_number() || !std::isfinite(v.get<double>())) {
              ck.error(at, "override exponent must be a finite number");
              continue;
            }
            int idx = 0;
            for (Symbol s : *syms) idx = idx * symbols + s;
            value[idx] = v.get<double>();
          }
        }
      }
      std::vector<Matrix> mats;
      for (double c : value) mats.push_back(Matrix::Constant(1, 1, std::exp(c)));
      return CocycleGenerator::symbol_dependent(mats, symbols, block);
    }
    if (type == "rotation_scaled") {
      ck.object(*g, p, {"type", "scale"});
      const double scale = ck.number(*g, p, "scale", 1.0, Range::positive());
      if (base && !base->is_circle()) {
        ck.error(p, "generator type 'rotation_scaled' needs a circle_rotation base");
        return std::nullopt;
      }
      return CocycleGenerator::angle_dependent(
          2,
          [scale](double theta) {
            const double t = 2.0 * M_PI * theta;
            Matrix m(2, 2);
            m << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
            return Matrix(scale * m);
          },
          "rotation_scaled");
    }
    if (type == "diagonal_operator") {
      ck.object(*g, p, {"type"});
      if (!model || !std::holds_alternative<DiagonalOperator>(model->kind())) {
        ck.error(p, "generator type 'diagonal_operator' needs operator_model type 'diagonal'");
        return std::nullopt;
      }
      const auto& op = std::get<DiagonalOperator>(model->kind());
      Vector w(op.truncation);
      for (int k = 0; k < op.truncation; ++k) w[k] = op.weights(k + 1);
      return CocycleGenerator::constant(w.asDiagonal());
    }
  } catch (const Error& e) {
    ck.error(p, e.what());
  }
  return std::nullopt;
}

void read_measures(Checker& ck, const json& doc, const BaseSystem& base, MeasureFamily& family) {
  const json empty = json::object();
  const json* m = ck.member(doc, "measures");
  const std::string p = "/measures";
  if (m && !ck.object(*m, p, {"p_max", "extra", "exclude"})) return;
  const json& obj = m ? *m : empty;
  const int p_max = static_cast<int>(ck.integer(obj, p, "p_max", 8, 1, 16));
  family = periodic_measures(base, p_max);

  if (const json* extra = ck.member(obj, "extra")) {
    if (!extra->is_array()) {
      ck.error(p + "/extra", "extra must be a list of measures");
    } else {
      for (std::size_t i = 0; i < extra->size(); ++i) {
        const json& e = (*extra)[i];
        const std::string at = p + "/extra/" + std::to_string(i);
        if (!ck.object(e, at, {"label", "type", "word", "probabilities"})) continue;
        const std::string type = ck.choice(e, at, "type", {"periodic", "bernoulli", "lebesgue"}, {});
        const json* label = ck.member(e, "label");
        if (!label || !label->is_string() || label->get<std::string>().empty()) {
          ck.error(label ? at + "/label" : at, "label must be a non-empty string");
          continue;
        }
        try {
          if (type == "periodic") {
            const json* word = ck.member(e, "word");
            const int k = base.symbol_count();
            const auto syms = word ? word_symbols(*word, std::max(k, 1)) : std::nullopt;
            if (!syms || k == 0) {
              ck.error(word ? at + "/word" : at, "word must list symbols (or orbit indices) below " + std::to_string(k));
              continue;
            }
            std::vector<BasePoint> pts;
            if (base.is_shift()) {
              const BasePoint q0 = ShiftPoint::periodic_word(*syms);
              for (std::size_t s = 0; s < syms->size(); ++s) pts.push_back(iterate(base, q0, s));
            } else {
              for (Symbol s : *syms) pts.push_back(OrbitPoint{s});
            }
            family.add(label->get<std::string>(), ErgodicMeasure::periodic_orbit(base, pts));
          } else if (type == "bernoulli") {
            const auto probs = ck.numbers(e, at, "probabilities", Range::closed(0.0, 1.0), true);
            if (probs.empty()) continue;
            if (!base.is_shift() || static_cast<int>(probs.size()) != base.symbol_count()) {
              ck.error(at + "/probabilities", "bernoulli needs a full_shift base and one probability per symbol");
              continue;
            }
            family.add(label->get<std::string>(), ErgodicMeasure::bernoulli(probs));
          } else if (type == "lebesgue") {
            if (!base.is_circle()) {
              ck.error(at, "lebesgue needs a circle_rotation base");
              continue;
            }
            family.add(label->get<std::string>(), ErgodicMeasure::lebesgue());
          }
        } catch (const Error& err) {
          ck.error(at, err.what());
        }
      }
    }
  }

  if (const json* ex = ck.member(obj, "exclude")) {
    if (!ex->is_array()) {
      ck.error(p + "/exclude", "exclude must be a list of labels");
    } else {
      for (std::size_t i = 0; i < ex->size(); ++i) {
        const json& l = (*ex)[i];
        if (!l.is_string() || !family.remove(l.get<std::string>())) {
          ck.error(p + "/exclude/" + std::to_string(i),
                   "no measure labelled " + (l.is_string() ? "'" + l.get<std::string>() + "'" : l.dump()));
        }
      }
    }
  }
  if (family.empty()) ck.error(p, "the measure family is empty");
}

VectorNorm read_norm(Checker& ck, const json& obj, const std::string& ptr, const std::string& key, int dim) {
  const json* n = ck.member(obj, key);
  const std::string at = ptr + "/" + key;
  if (!n) return VectorNorm::euclidean();
  if (!ck.object(*n, at, {"type", "weights"})) return VectorNorm::euclidean();
  const std::string type = ck.choice(*n, at, "type", {"euclidean", "sup", "weighted_sup"}, {});
  if (type == "sup") return VectorNorm::sup(std::max(dim, 1));
  if (type == "weighted_sup") {
    const auto w = ck.numbers(*n, at, "weights", Range::positive(), true);
    if (dim > 0 && !w.empty() && static_cast<int>(w.size()) != dim) {
      ck.error(at + "/weights", "expected " + std::to_string(dim) + " weights");
      return VectorNorm::euclidean();
    }
    if (!w.empty()) return VectorNorm::weighted_sup(w);
  }
  return VectorNorm::euclidean();
}

void read_sections(Checker& ck, const json& doc, ExperimentConfig& cfg, int dim) {
  const json empty = json::object();
  auto section = [&](const std::string& key, const std::vector<std::string>& allowed) -> const json& {
    const json* s = ck.member(doc, key);
    if (!s) return empty;
    if (!ck.object(*s, "/" + key, allowed)) return empty;
    return *s;
  };

  const json& scan = section("scan", {"grid_step", "tolerance", "n_max", "margin", "lambda_min", "floor",
                                      "interval_budget", "norm_budget", "p_max", "recheck"});
  ScanConfig& sc = cfg.scan;
  sc.grid_step = ck.number(scan, "/scan", "grid_step", 0.02, Range::positive());
  sc.tolerance = ck.number(scan, "/scan", "tolerance", 1e-3, Range::positive());
  sc.dichotomy.n_max = static_cast<int>(ck.integer(scan, "/scan", "n_max", 128, 8, 8192));
  sc.dichotomy.margin = ck.number(scan, "/scan", "margin", 5e-4, Range::positive());
  sc.dichotomy.lambda_min = ck.number(scan, "/scan", "lambda_min", 0.0, Range::nonnegative());
  sc.dichotomy.recheck = ck.boolean(scan, "/scan", "recheck", true);
  sc.floor = ck.optional_number(scan, "/scan", "floor");
  sc.interval_budget = static_cast<int>(ck.integer(scan, "/scan", "interval_budget", 32, 1, 1024));
  sc.norm_budget = static_cast<int>(ck.integer(scan, "/scan", "norm_budget", 1000, 1, 1000000));
  sc.p_max = static_cast<int>(ck.integer(scan, "/scan", "p_max", 8, 1, 16));
  if (sc.grid_step > 0 && sc.dichotomy.margin > 0 && !(sc.grid_step > 2 * sc.dichotomy.margin)) {
    ck.error("/scan/grid_step", "grid step must exceed twice the margin");
  }
  if (sc.tolerance > 0 && sc.grid_step > 0 && !(sc.tolerance < sc.grid_step)) {
    ck.error("/scan/tolerance", "tolerance must be below the grid step");
  }

  const json& ly = section("lyapunov", {"n_max", "resolution"});
  cfg.lyapunov_n_max = static_cast<int>(ck.integer(ly, "/lyapunov", "n_max", 512, 8, 1 << 20));
  cfg.lyapunov_resolution = ck.number(ly, "/lyapunov", "resolution", 0.05, Range::positive());

  const json& jps = section("jps", {"n_max", "match_tolerance", "resolution"});
  cfg.jps.n_max = static_cast<int>(ck.integer(jps, "/jps", "n_max", 1024, 8, 1 << 16));
  cfg.jps.match_tolerance = ck.number(jps, "/jps", "match_tolerance", 1e-2, Range::positive());
  cfg.jps.resolution = ck.number(jps, "/jps", "resolution", 0.05, Range::positive());

  const json& qc = section("quasicompact", {"n_max", "tolerance"});
  cfg.quasicompact_n_max = static_cast<int>(ck.integer(qc, "/quasicompact", "n_max", 32, 2, 1 << 16));
  cfg.quasicompact_tolerance = ck.number(qc, "/quasicompact", "tolerance", 1e-6, Range::nonnegative());

  if (const json* lys = ck.member(doc, "lasota_yorke")) {
    const std::string p = "/lasota_yorke";
    if (ck.object(*lys, p, {"alpha", "beta", "gamma", "strong", "weak", "test_vectors"})) {
      LasotaYorkeSettings s;
      s.alpha = ck.number(*lys, p, "alpha", {}, Range::positive());
      s.beta = ck.number(*lys, p, "beta", {}, Range::positive());
      s.gamma = ck.number(*lys, p, "gamma", {}, Range::positive());
      s.strong = read_norm(ck, *lys, p, "strong", dim);
      s.weak = read_norm(ck, *lys, p, "weak", dim);
      s.test_vectors = static_cast<int>(ck.integer(*lys, p, "test_vectors", 20, 1, 100000));
      cfg.lasota_yorke = s;
    }
  }

  const json& out = section("output", {"dir", "traces"});
  if (const json* d = ck.member(out, "dir")) {
    if (!d->is_string() || d->get<std::string>().empty()) ck.error("/output/dir", "dir must be a non-empty string");
    else cfg.out_dir = d->get<std::string>();
  }
  cfg.traces = ck.boolean(out, "/output", "traces", true);
}

}  // namespace

std::map<std::string, int> line_index(const std::string& text) {
  std::map<std::string, int> out;
  LineScanner(text, out).value("");
  return out;
}

Validation validate(const std::string& text, const std::optional<std::string>& command,
                    const std::optional<std::uint64_t>& seed) {
  Validation v;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    v.errors.push_back({"", line, std::string("invalid JSON: ") + e.what()});
    return v;
  }
  Checker ck(line_index(text), v.errors);
  if (!doc.is_object()) {
    ck.error("", "config must be a JSON object");
    return v;
  }
  if (command) doc["command"] = *command;
  if (seed) doc["seed"] = *seed;

  ck.object(doc, "", {"command", "seed", "threads", "base", "generator", "shift", "operator_model", "measures",
                      "scan", "lyapunov", "jps", "quasicompact", "lasota_yorke", "output"});

  ExperimentConfig cfg;
  cfg.command = ck.choice(doc, "", "command", kCommands, {});
  const json* s = ck.member(doc, "seed");
  if (s && !(s->is_number_unsigned() || (s->is_number_integer() && s->get<std::int64_t>() >= 0))) {
    ck.error("/seed", "seed must be a non-negative integer");
  } else if (s) {
    cfg.seed = s->get<std::uint64_t>();
  }
  const int threads = static_cast<int>(ck.integer(doc, "", "threads", 1, 1, 256));
  cfg.scan.threads = threads;
  cfg.jps.threads = threads;

  // selftest carries its own fixtures; everything else needs a system.
  const bool needs_system = cfg.command != "selftest";
  std::optional<BaseSystem> base;
  if (needs_system || doc.contains("base")) base = read_base(ck, doc);
  bool model_ok = true;
  const auto model = read_model(ck, doc, model_ok);
  std::optional<CocycleGenerator> gen;
  if (needs_system || doc.contains("generator")) gen = read_generator(ck, doc, base, model);
  const double shift = ck.number(doc, "", "shift", 0.0);
  const int dim = gen ? gen->dim() : 0;
  read_sections(ck, doc, cfg, dim);

  if (base && gen && model_ok) {
    try {
      cfg.cocycle.emplace(*base, *gen, shift, model);
    } catch (const Error& e) {
      ck.error(model ? "/operator_model" : "/generator", e.what());
    }
  }
  if (base) read_measures(ck, doc, *base, cfg.family);

  cfg.scan.seed = cfg.seed;
  cfg.jps.seed = cfg.seed;
  if (v.errors.empty()) {
    try {
      cfg.scan.validate();
    } catch (const Error& e) {
      ck.error("/scan", e.what());
    }
  }

  if (!v.errors.empty()) {
    std::stable_sort(v.errors.begin(), v.errors.end(),
                     [](const ConfigError& a, const ConfigError& b) { return a.line < b.line; });
    return v;
  }
  cfg.base = base;
  cfg.model = model;
  cfg.document = doc;
  v.config = std::move(cfg);
  return v;
}

}  // namespace sspec::cli
