#include "sweep/problem_file.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace sweep {

namespace {

using json = nlohmann::json;

struct Entry {
  json value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

class Parser {
 public:
  Parser(const std::string& text, std::string source) : text_(text), src_(std::move(source)) {}

  std::map<std::string, Section> run() {
    std::map<std::string, Section> doc;
    std::string current;  // "" is the top level
    doc[current];
    while (pos_ < text_.size()) {
      skip_blank_and_comments();
      if (pos_ >= text_.size()) break;
      if (text_[pos_] == '[') {
        ++pos_;
        std::string name = identifier();
        skip_spaces();
        expect(']');
        end_of_line();
        if (doc.count(name) && name != "") fail("duplicate section [" + name + "]");
        current = name;
        doc[current];
        continue;
      }
      int key_line = line_;
      std::string key = identifier();
      skip_spaces();
      expect('=');
      skip_spaces();
      json v = value();
      end_of_line();
      if (doc[current].count(key)) fail("duplicate key '" + key + "'", key_line);
      doc[current][key] = {std::move(v), key_line};
    }
    return doc;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, int line = -1) const {
    throw Error(ErrorCode::kParseError, src_ + ":" + std::to_string(line < 0 ? line_ : line) + ": " + msg);
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void advance() {
    if (text_[pos_] == '\n') ++line_;
    ++pos_;
  }

  void skip_spaces() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }

  // whitespace, newlines and comments (used inside arrays and between statements)
  void skip_blank_and_comments() {
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (ch == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        advance();
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_spaces();
    if (peek() == '#')
      while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    if (pos_ < text_.size() && text_[pos_] != '\n') fail("unexpected text after value");
  }

  void expect(char ch) {
    if (peek() != ch) fail(std::string("expected '") + ch + "'");
    advance();
  }

  std::string identifier() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' || text_[pos_] == '-'))
      ++pos_;
    if (start == pos_) fail("expected a name");
    return text_.substr(start, pos_ - start);
  }

  json value() {
    char ch = peek();
    if (ch == '[') {
      advance();
      json arr = json::array();
      skip_blank_and_comments();
      if (peek() == ']') {
        advance();
        return arr;
      }
      while (true) {
        skip_blank_and_comments();
        arr.push_back(value());
        skip_blank_and_comments();
        if (peek() == ',') {
          advance();
          skip_blank_and_comments();
          if (peek() == ']') {
            advance();
            return arr;
          }
          continue;
        }
        if (peek() == ']') {
          advance();
          return arr;
        }
        fail("expected ',' or ']' in array");
      }
    }
    if (ch == '"') {
      advance();
      std::string s;
      while (peek() != '"') {
        if (peek() == '\0' || peek() == '\n') fail("unterminated string");
        s += text_[pos_++];
      }
      advance();
      return s;
    }
    size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                                   text_[pos_] == '-' || text_[pos_] == '+' || text_[pos_] == '_'))
      ++pos_;
    std::string tok = text_.substr(start, pos_ - start);
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.empty()) fail("expected a value");
    std::string clean;
    for (char c : tok)
      if (c != '_') clean += c;
    try {
      size_t used = 0;
      if (clean.find_first_of(".eEn") == std::string::npos) {
        long long v = std::stoll(clean, &used);
        if (used == clean.size()) return v;
      }
      double v = std::stod(clean, &used);
      if (used == clean.size()) return v;
    } catch (const std::exception&) {
    }
    fail("bad value '" + tok + "'");
  }

  const std::string& text_;
  std::string src_;
  size_t pos_ = 0;
  int line_ = 1;
};

// Typed access with line-anchored errors.
class Reader {
 public:
  Reader(const std::map<std::string, Section>& doc, std::string src) : doc_(doc), src_(std::move(src)) {}

  bool has_section(const std::string& s) const { return doc_.count(s) > 0; }

  const Section& section(const std::string& s) const {
    auto it = doc_.find(s);
    if (it == doc_.end()) throw Error(ErrorCode::kMissingSection, src_ + ": missing section [" + s + "]");
    return it->second;
  }

  const Entry& get(const std::string& s, const std::string& key) const {
    const Section& sec = section(s);
    auto it = sec.find(key);
    if (it == sec.end())
      throw Error(ErrorCode::kParseError, src_ + ": " + where(s) + " is missing key '" + key + "'");
    return it->second;
  }

  bool has(const std::string& s, const std::string& key) const {
    auto it = doc_.find(s);
    return it != doc_.end() && it->second.count(key);
  }

  [[noreturn]] void fail(const Entry& e, const std::string& msg) const {
    throw Error(ErrorCode::kParseError, src_ + ":" + std::to_string(e.line) + ": " + msg);
  }

  double number(const std::string& s, const std::string& key) const {
    const Entry& e = get(s, key);
    if (!e.value.is_number()) fail(e, "'" + key + "' must be a number");
    return e.value.get<double>();
  }

  long long integer(const std::string& s, const std::string& key) const {
    const Entry& e = get(s, key);
    if (!e.value.is_number_integer()) fail(e, "'" + key + "' must be an integer");
    return e.value.get<long long>();
  }

  std::string string(const std::string& s, const std::string& key) const {
    const Entry& e = get(s, key);
    if (!e.value.is_string()) fail(e, "'" + key + "' must be a string");
    return e.value.get<std::string>();
  }

  Vec vec(const std::string& s, const std::string& key) const { return to_vec(get(s, key)); }

  Vec to_vec(const Entry& e) const {
    if (!e.value.is_array()) fail(e, "expected an array of numbers");
    Vec v(static_cast<Eigen::Index>(e.value.size()));
    for (size_t k = 0; k < e.value.size(); ++k) {
      if (!e.value[k].is_number()) fail(e, "expected an array of numbers");
      v(k) = e.value[k].get<double>();
    }
    return v;
  }

  std::vector<Vec> rows(const std::string& s, const std::string& key) const {
    const Entry& e = get(s, key);
    if (!e.value.is_array()) fail(e, "'" + key + "' must be an array of arrays");
    std::vector<Vec> out;
    for (const auto& r : e.value) out.push_back(to_vec({r, e.line}));
    return out;
  }

  Mat matrix(const std::string& s, const std::string& key) const {
    std::vector<Vec> r = rows(s, key);
    const Entry& e = get(s, key);
    if (r.empty()) fail(e, "'" + key + "' must not be empty");
    Mat M(static_cast<Eigen::Index>(r.size()), r.front().size());
    for (size_t k = 0; k < r.size(); ++k) {
      if (r[k].size() != M.cols()) fail(e, "'" + key + "' rows differ in length");
      M.row(k) = r[k].transpose();
    }
    return M;
  }

  int line(const std::string& s, const std::string& key) const { return get(s, key).line; }

 private:
  static std::string where(const std::string& s) { return s.empty() ? "top level" : "[" + s + "]"; }

  const std::map<std::string, Section>& doc_;
  std::string src_;
};

template <class F>
auto anchored(const Reader& rd, const std::string& s, const std::string& key, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError || e.code() == ErrorCode::kMissingSection) throw;
    rd.fail(rd.get(s, key), e.detail());
  }
}

}  // namespace

ProblemFile parse_problem_text(const std::string& text, const std::string& source) {
  auto doc = Parser(text, source).run();
  Reader rd(doc, source);

  const double T = rd.number("", "T");
  Vec x0 = rd.vec("", "x0");

  Polyhedron C = anchored(rd, "polyhedron", "generators", [&] {
    return Polyhedron(rd.matrix("polyhedron", "generators"), rd.vec("polyhedron", "offsets"));
  });

  std::string ukind = rd.string("control_set", "kind");
  ControlSet U = anchored(rd, "control_set", "kind", [&] {
    if (ukind == "box") return ControlSet::box(rd.vec("control_set", "lo"), rd.vec("control_set", "hi"));
    if (ukind == "finite") return ControlSet::finite(rd.rows("control_set", "points"));
    if (ukind == "ball") return ControlSet::ball(rd.vec("control_set", "center"), rd.number("control_set", "radius"));
    rd.fail(rd.get("control_set", "kind"), "unknown control set kind '" + ukind + "'");
  });

  std::string gkind = rd.string("perturbation", "kind");
  PerturbationMap g = anchored(rd, "perturbation", "kind", [&] {
    if (gkind == "affine") {
      Mat G = rd.has("perturbation", "G") ? rd.matrix("perturbation", "G") : Mat::Zero(C.dim(), C.dim());
      Mat B = rd.matrix("perturbation", "B");
      Vec b = rd.has("perturbation", "b") ? rd.vec("perturbation", "b") : Vec::Zero(C.dim());
      return PerturbationMap::affine(G, B, b);
    }
    return PerturbationMap::catalog(gkind, C.dim());
  });

  std::string ckind = rd.string("cost", "kind");
  CostFunction phi = anchored(rd, "cost", "kind", [&] {
    if (ckind == "linear") return CostFunction::linear(rd.vec("cost", "a"));
    if (ckind == "quadratic") return CostFunction::quadratic(rd.matrix("cost", "Q"), rd.vec("cost", "a"));
    if (ckind == "half_norm_sq") return CostFunction::half_norm_sq(C.dim());
    rd.fail(rd.get("cost", "kind"), "unknown cost kind '" + ckind + "'");
  });
  if (ckind != "half_norm_sq" && rd.vec("cost", "a").size() != C.dim())
    rd.fail(rd.get("cost", "a"), "cost dimension differs from the state dimension");

  ProblemFile pf{SweepingProblem{C, U, g, phi, x0, T}, std::nullopt, SolveOptions{}, std::nullopt};
  anchored(rd, "", "x0", [&] {
    pf.problem.validate();
    return 0;
  });

  if (rd.has_section("control")) {
    pf.control = anchored(rd, "control", "values", [&] {
      std::vector<Vec> values = rd.rows("control", "values");
      std::vector<double> breaks;
      if (rd.has("control", "breakpoints")) {
        Vec b = rd.vec("control", "breakpoints");
        breaks.assign(b.data(), b.data() + b.size());
      } else {
        breaks = {0.0};
      }
      BVControl ctl(breaks, values);
      if (ctl.dim() != U.dim()) throw Error(ErrorCode::kInvalidArgument, "control dimension differs from U");
      if (breaks.back() > T) throw Error(ErrorCode::kInvalidArgument, "breakpoint beyond T");
      for (const auto& v : values)
        if (!U.contains(v)) throw Error(ErrorCode::kInvalidArgument, "control value outside U");
      return ctl;
    });
  }

  if (rd.has_section("solver")) {
    SolveOptions& o = pf.solver;
    if (rd.has("solver", "max_iters")) o.max_iters = static_cast<int>(rd.integer("solver", "max_iters"));
    if (rd.has("solver", "multistart")) o.multistart = static_cast<int>(rd.integer("solver", "multistart"));
    if (rd.has("solver", "seed")) o.seed = static_cast<std::uint64_t>(rd.integer("solver", "seed"));
    if (rd.has("solver", "step_size_init")) o.step_size_init = rd.number("solver", "step_size_init");
    if (rd.has("solver", "armijo_c")) o.armijo_c = rd.number("solver", "armijo_c");
    if (rd.has("solver", "backtrack")) o.backtrack = rd.number("solver", "backtrack");
    if (rd.has("solver", "fd_epsilon")) o.fd_epsilon = rd.number("solver", "fd_epsilon");
    if (rd.has("solver", "stop_tol")) o.stop_tol = rd.number("solver", "stop_tol");
    for (const auto& [key, e] : rd.section("solver")) {
      static const char* known[] = {"max_iters", "multistart", "seed", "step_size_init",
                                    "armijo_c",  "backtrack",  "fd_epsilon", "stop_tol"};
      if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; }))
        rd.fail(e, "unknown solver option '" + key + "'");
    }
    if (o.multistart < 1) rd.fail(rd.get("solver", "multistart"), "multistart must be at least 1");
  }

  if (rd.has_section("certificate")) {
    const std::string s = "certificate";
    Certificate c;
    const int n = C.dim(), d = U.dim(), m = C.count();
    auto opt = [&](const char* key, int size) { return rd.has(s, key) ? rd.vec(s, key) : Vec(Vec::Zero(size)); };
    c.lambda = rd.has(s, "lambda") ? rd.number(s, "lambda") : 1.0;
    c.p = opt("p", n);
    c.q = rd.has(s, "q") ? rd.vec(s, "q") : c.p;
    c.psi = opt("psi", d);
    c.eta = opt("eta", m);
    c.eta_T = opt("eta_T", m);
    c.gamma = opt("gamma", m);
    if (rd.has(s, "atom_times")) {
      Vec times = rd.vec(s, "atom_times");
      std::vector<Vec> masses = rd.rows(s, "atom_masses");
      if (static_cast<size_t>(times.size()) != masses.size())
        rd.fail(rd.get(s, "atom_masses"), "atom_times and atom_masses differ in length");
      for (size_t k = 0; k < masses.size(); ++k) c.atoms.emplace_back(times(k), masses[k]);
    }
    try {
      c.validate(n, d, m);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, source + ": [certificate]: " + e.detail());
    }
    pf.certificate = c;
  }

  for (const auto& [name, sec] : doc) {
    static const char* known[] = {"", "polyhedron", "control_set", "perturbation", "cost",
                                  "control", "solver", "certificate"};
    if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return name == k; })) {
      int line = sec.empty() ? 0 : sec.begin()->second.line;
      throw Error(ErrorCode::kParseError, source + ":" + std::to_string(line) + ": unknown section [" + name + "]");
    }
  }
  return pf;
}

ProblemFile load_problem_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_text(ss.str(), path);
}

}  // namespace sweep
