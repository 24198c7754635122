#include "windcommit/lp_format.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <sys/wait.h>
#include <unistd.h>

namespace windcommit {

namespace {

std::string num(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) ||
         std::string_view("!\"#$%&()/,.;?@_`'{}|~").find(c) != std::string_view::npos;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool reserved(const std::string& name) {
  static const std::unordered_set<std::string> words = {
      "minimize", "minimum", "min",  "maximize", "maximum", "max",    "subject", "such",
      "st",       "s.t.",    "bounds", "bound", "binaries", "binary", "bin",     "generals",
      "general",  "gen",     "end",  "free",    "inf",     "infinity", "status"};
  return words.count(lower(name)) > 0;
}

std::string sanitize(const std::string& raw, const std::string& fallback) {
  std::string s;
  for (char c : raw) s += name_char(c) ? c : '_';
  if (s.empty()) s = fallback;
  if (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.') s = "_" + s;
  if (lower(s) == "e" || (s.size() > 1 && (s[0] == 'e' || s[0] == 'E') &&
                          std::isdigit(static_cast<unsigned char>(s[1]))))
    s = "_" + s;
  if (reserved(s)) s += "_";
  return s;
}

std::vector<std::string> unique_names(const std::vector<std::string>& raw, std::size_t count,
                                      const char* prefix) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (std::size_t j = 0; j < count; ++j) {
    const std::string fallback = prefix + std::to_string(j);
    std::string s = sanitize(j < raw.size() ? raw[j] : fallback, fallback);
    if (seen.count(s)) s = sanitize(s + "_" + std::to_string(j), fallback);
    while (seen.count(s)) s += "_";
    seen.insert(s);
    out.push_back(std::move(s));
  }
  return out;
}

void write_expr(std::ostringstream& out, const std::vector<std::pair<double, std::string>>& terms,
                std::size_t indent) {
  std::size_t width = indent;
  bool first = true;
  for (const auto& [coef, name] : terms) {
    std::string piece;
    if (first) {
      piece = num(coef) + " " + name;
    } else {
      piece = (coef < 0 || (coef == 0 && std::signbit(coef)) ? "- " : "+ ") + num(std::abs(coef)) +
              " " + name;
    }
    if (!first && width + piece.size() > 78) {
      out << "\n   ";
      width = 3;
    } else if (!first) {
      out << ' ';
      ++width;
    }
    out << piece;
    width += piece.size();
    first = false;
  }
  if (first) out << "0";
}

// ---- tokenizer ----

enum class Tok { Name, Number, Op, Colon, Plus, Minus, End };

struct Token {
  Tok kind;
  std::string text;
  double value = 0.0;
  std::size_t line = 0;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> toks;
  std::size_t i = 0, line = 1;
  while (i < s.size()) {
    char c = s[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '\\') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    if (c == '+' || c == '-') {
      toks.push_back({c == '+' ? Tok::Plus : Tok::Minus, std::string(1, c), 0, line});
      ++i;
      continue;
    }
    if (c == ':') {
      toks.push_back({Tok::Colon, ":", 0, line});
      ++i;
      continue;
    }
    if (c == '<' || c == '>' || c == '=') {
      std::string op(1, c);
      if (i + 1 < s.size() && (s[i + 1] == '=' || s[i + 1] == '<' || s[i + 1] == '>')) op += s[++i];
      ++i;
      if (op == "=<" || op == "<") op = "<=";
      if (op == "=>" || op == ">") op = ">=";
      if (op != "<=" && op != ">=" && op != "=") throw LpFormatError("bad operator '" + op + "' on line " + std::to_string(line));
      toks.push_back({Tok::Op, op, 0, line});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      // A '.' followed by a letter starts a name only if not a number.
      std::string rest(s.substr(i, std::min<std::size_t>(64, s.size() - i)));
      char* end = nullptr;
      double v = std::strtod(rest.c_str(), &end);
      if (end != rest.c_str()) {
        std::size_t len = static_cast<std::size_t>(end - rest.c_str());
        toks.push_back({Tok::Number, rest.substr(0, len), v, line});
        i += len;
        continue;
      }
    }
    if (name_char(c)) {
      std::size_t j = i;
      while (j < s.size() && name_char(s[j])) ++j;
      toks.push_back({Tok::Name, std::string(s.substr(i, j - i)), 0, line});
      i = j;
      continue;
    }
    throw LpFormatError("unexpected character '" + std::string(1, c) + "' on line " +
                        std::to_string(line));
  }
  toks.push_back({Tok::End, "", 0, line});
  return toks;
}

enum class Section { None, Objective, Constraints, Bounds, Binaries, Generals, End };

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

  MilpProblem parse() {
    Section sec = section_at(pos_);
    if (sec != Section::Objective) fail("LP text must start with Minimize");
    while (true) {
      sec = section_at(pos_);
      if (sec == Section::None) fail("expected a section keyword");
      skip_section_keyword();
      switch (sec) {
        case Section::Objective: parse_objective(); break;
        case Section::Constraints: parse_constraints(); break;
        case Section::Bounds: parse_bounds(); break;
        case Section::Binaries: parse_types(VarType::Binary); break;
        case Section::Generals: parse_types(VarType::Integer); break;
        case Section::End: return finish();
        case Section::None: break;
      }
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw LpFormatError(msg + " (line " + std::to_string(toks_[pos_].line) + ")");
  }

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }

  Section section_at(std::size_t p) const {
    const Token& t = toks_[p];
    if (t.kind == Tok::End) return Section::End;
    if (t.kind != Tok::Name) return Section::None;
    // a label such as "min:" is a name, not a keyword
    if (toks_[p + 1].kind == Tok::Colon) return Section::None;
    const std::string w = lower(t.text);
    if (w == "minimize" || w == "minimum" || w == "min") return Section::Objective;
    if (w == "maximize" || w == "maximum" || w == "max") return Section::Objective;
    if (w == "st" || w == "s.t.") return Section::Constraints;
    if ((w == "subject" || w == "such") && toks_[p + 1].kind == Tok::Name) {
      const std::string w2 = lower(toks_[p + 1].text);
      if (w2 == "to" || w2 == "that") return Section::Constraints;
    }
    if (w == "bounds" || w == "bound") return Section::Bounds;
    if (w == "binaries" || w == "binary" || w == "bin") return Section::Binaries;
    if (w == "generals" || w == "general" || w == "gen") return Section::Generals;
    if (w == "end") return Section::End;
    return Section::None;
  }

  void skip_section_keyword() {
    const std::string w = lower(toks_[pos_].text);
    if (w == "maximize" || w == "maximum" || w == "max") maximize_ = true;
    if (w == "subject" || w == "such") ++pos_;
    if (toks_[pos_].kind != Tok::End) ++pos_;
  }

  bool at_section() const { return section_at(pos_) != Section::None; }

  std::size_t var(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    const std::size_t j = p_.add_variable(name, 0.0, kInf, 0.0);
    index_.emplace(name, j);
    bounded_.push_back(false);
    return j;
  }

  // Linear expression; returns terms and accumulates constants into `constant`.
  std::vector<Term> expression(double& constant) {
    std::vector<Term> terms;
    bool any = false;
    while (true) {
      const Token& t = peek();
      if (t.kind == Tok::Op || t.kind == Tok::End) break;
      if (t.kind == Tok::Name && at_section()) break;
      if (t.kind == Tok::Name && peek(1).kind == Tok::Colon) break;  // next label
      double sign = 1.0;
      bool signed_term = false;
      while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
        if (peek().kind == Tok::Minus) sign = -sign;
        signed_term = true;
        ++pos_;
      }
      if (any && !signed_term) break;  // a new statement begins
      double coef = 1.0;
      bool have_number = false;
      if (peek().kind == Tok::Number) {
        coef = peek().value;
        have_number = true;
        ++pos_;
      } else if (peek().kind == Tok::Name && is_infinity(peek().text)) {
        fail("infinite coefficient");
      }
      if (peek().kind == Tok::Name && !at_section() && peek(1).kind != Tok::Colon) {
        terms.push_back({var(peek().text), sign * coef});
        ++pos_;
      } else if (have_number) {
        constant += sign * coef;
      } else {
        fail("expected a term");
      }
      any = true;
    }
    return terms;
  }

  static bool is_infinity(const std::string& s) {
    const std::string w = lower(s);
    return w == "inf" || w == "infinity";
  }

  std::optional<double> signed_number() {
    double sign = 1.0;
    std::size_t save = pos_;
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      if (peek().kind == Tok::Minus) sign = -sign;
      ++pos_;
    }
    if (peek().kind == Tok::Number) {
      double v = peek().value;
      ++pos_;
      return sign * v;
    }
    if (peek().kind == Tok::Name && is_infinity(peek().text)) {
      ++pos_;
      return sign * kInf;
    }
    pos_ = save;
    return std::nullopt;
  }

  void parse_objective() {
    if (peek().kind == Tok::Name && peek(1).kind == Tok::Colon) pos_ += 2;
    double constant = 0.0;
    for (const auto& t : expression(constant)) p_.objective[t.var] += maximize_ ? -t.coef : t.coef;
  }

  void parse_constraints() {
    while (!at_section()) {
      std::string name;
      if (peek().kind == Tok::Name && peek(1).kind == Tok::Colon) {
        name = peek().text;
        pos_ += 2;
      }
      double constant = 0.0;
      auto terms = expression(constant);
      if (peek().kind != Tok::Op) fail("expected comparison operator");
      const std::string op = peek().text;
      ++pos_;
      auto rhs = signed_number();
      if (!rhs || !std::isfinite(*rhs)) fail("expected finite right-hand side");
      Sense sense = op == "<=" ? Sense::LessEqual : (op == ">=" ? Sense::GreaterEqual : Sense::Equal);
      if (name.empty()) name = "c" + std::to_string(p_.num_rows() + 1);
      p_.add_constraint(std::move(name), std::move(terms), sense, *rhs - constant);
    }
  }

  void set_bound(std::size_t j, const std::string& op, double v, bool var_on_left) {
    bounded_[j] = true;
    if (op == "=") {
      p_.lower[j] = p_.upper[j] = v;
      return;
    }
    const bool upper = (op == "<=") == var_on_left;
    (upper ? p_.upper[j] : p_.lower[j]) = v;
  }

  void parse_bounds() {
    while (!at_section()) {
      if (auto v = signed_number()) {
        if (peek().kind != Tok::Op) fail("expected operator in bound");
        std::string op1 = peek().text;
        ++pos_;
        if (peek().kind != Tok::Name) fail("expected variable in bound");
        std::size_t j = var(peek().text);
        ++pos_;
        set_bound(j, op1, *v, false);
        if (peek().kind == Tok::Op) {
          std::string op2 = peek().text;
          ++pos_;
          auto v2 = signed_number();
          if (!v2) fail("expected number in bound");
          set_bound(j, op2, *v2, true);
        }
        continue;
      }
      if (peek().kind != Tok::Name) fail("malformed bound");
      std::size_t j = var(peek().text);
      ++pos_;
      if (peek().kind == Tok::Name && lower(peek().text) == "free") {
        ++pos_;
        p_.lower[j] = -kInf;
        p_.upper[j] = kInf;
        bounded_[j] = true;
        continue;
      }
      if (peek().kind != Tok::Op) fail("expected operator in bound");
      std::string op = peek().text;
      ++pos_;
      auto v = signed_number();
      if (!v) fail("expected number in bound");
      set_bound(j, op, *v, true);
    }
  }

  void parse_types(VarType type) {
    while (!at_section()) {
      if (peek().kind != Tok::Name) fail("expected variable name");
      std::size_t j = var(peek().text);
      ++pos_;
      p_.types[j] = type;
      if (type == VarType::Binary && !bounded_[j]) {
        p_.lower[j] = 0.0;
        p_.upper[j] = 1.0;
      }
    }
  }

  MilpProblem finish() {
    p_.validate();
    return std::move(p_);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  MilpProblem p_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<bool> bounded_;
  bool maximize_ = false;
};

}  // namespace

std::vector<std::string> lp_names(const MilpProblem& problem) {
  return unique_names(problem.names, problem.num_vars(), "x");
}

std::string write_lp(const MilpProblem& problem) {
  problem.validate();
  const auto names = lp_names(problem);
  std::vector<std::string> raw_rows;
  for (const auto& c : problem.constraints) raw_rows.push_back(c.name);
  const auto row_names = unique_names(raw_rows, problem.num_rows(), "c");

  std::ostringstream out;
  out << "\\ windcommit LP: " << problem.num_vars() << " variables, " << problem.num_rows()
      << " constraints\n";
  out << "Minimize\n obj: ";
  std::vector<std::pair<double, std::string>> terms;
  for (std::size_t j = 0; j < problem.num_vars(); ++j)
    terms.emplace_back(problem.objective[j], names[j]);
  write_expr(out, terms, 6);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < problem.num_rows(); ++i) {
    const auto& c = problem.constraints[i];
    out << ' ' << row_names[i] << ": ";
    terms.clear();
    for (const auto& t : c.terms) terms.emplace_back(t.coef, names[t.var]);
    write_expr(out, terms, row_names[i].size() + 3);
    const char* op = c.sense == Sense::LessEqual ? " <= " : (c.sense == Sense::GreaterEqual ? " >= " : " = ");
    out << op << num(c.rhs) << "\n";
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < problem.num_vars(); ++j) {
    const double lb = problem.lower[j], ub = problem.upper[j];
    if (lb == -kInf && ub == kInf)
      out << ' ' << names[j] << " free\n";
    else
      out << ' ' << num(lb) << " <= " << names[j] << " <= " << num(ub) << "\n";
  }
  auto section = [&](VarType type, const char* title) {
    bool any = false;
    for (std::size_t j = 0; j < problem.num_vars(); ++j) {
      if (problem.types[j] != type) continue;
      if (!any) out << title << "\n";
      any = true;
      out << ' ' << names[j] << "\n";
    }
  };
  section(VarType::Binary, "Binaries");
  section(VarType::Integer, "Generals");
  out << "End\n";
  return out.str();
}

MilpProblem parse_lp(std::string_view text) { return Parser(text).parse(); }

std::string write_solution_file(const MilpProblem& problem, const MilpSolution& solution) {
  std::ostringstream out;
  out << "status " << to_string(solution.status) << "\n";
  if (!solution.values.empty()) {
    const auto names = lp_names(problem);
    for (std::size_t j = 0; j < problem.num_vars(); ++j)
      out << names[j] << ' ' << num(solution.values.at(j)) << "\n";
  }
  return out.str();
}

MilpSolution parse_solution_file(std::string_view text, const MilpProblem& problem) {
  const auto names = lp_names(problem);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < names.size(); ++j) index.emplace(names[j], j);

  MilpSolution sol;
  bool have_status = false;
  std::vector<bool> seen(names.size(), false);
  std::vector<double> values(names.size(), 0.0);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key) || key[0] == '#') continue;
    if (!(ls >> value)) throw LpFormatError("solution line " + std::to_string(lineno) + " lacks a value");
    if (!have_status) {
      if (key != "status") throw LpFormatError("solution file must start with a status line");
      sol.status = status_from_string(value);
      have_status = true;
      continue;
    }
    auto it = index.find(key);
    if (it == index.end()) throw LpFormatError("solution names unknown variable '" + key + "'");
    char* end = nullptr;
    double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
      throw LpFormatError("bad value '" + value + "' on solution line " + std::to_string(lineno));
    values[it->second] = v;
    seen[it->second] = true;
  }
  if (!have_status) throw LpFormatError("solution file has no status line");
  std::size_t count = 0;
  for (bool b : seen) count += b;
  if (count > 0) {
    if (count != names.size()) throw LpFormatError("solution file omits some variables");
    sol.values = std::move(values);
    sol.has_incumbent = true;
    sol.objective = objective_value(problem, sol.values);
    if (sol.status == SolveStatus::Optimal) {
      sol.bound = sol.objective;
      sol.gap = 0.0;
    }
  } else if (sol.status == SolveStatus::Optimal && names.empty()) {
    sol.has_incumbent = true;
    sol.objective = 0.0;
    sol.bound = 0.0;
    sol.gap = 0.0;
  } else if (sol.status == SolveStatus::Optimal) {
    throw LpFormatError("optimal solution file carries no values");
  }
  return sol;
}

ExternalSolverAdapter::ExternalSolverAdapter(std::string command_template,
                                             std::filesystem::path work_dir)
    : command_template_(std::move(command_template)), work_dir_(std::move(work_dir)) {}

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

}  // namespace

MilpSolution ExternalSolverAdapter::solve(const MilpProblem& problem) {
  namespace fs = std::filesystem;
  if (command_template_.empty()) throw AdapterError("external solver command is not configured", "");
  fs::path base = work_dir_.empty() ? fs::temp_directory_path() : work_dir_;
  std::string pattern = (base / "windcommit-lp-XXXXXX").string();
  std::vector<char> buf(pattern.begin(), pattern.end());
  buf.push_back('\0');
  if (!mkdtemp(buf.data())) throw AdapterError("cannot create adapter work directory", "");
  const fs::path dir(buf.data());
  const fs::path lp = dir / "problem.lp", sol = dir / "solution.txt";
  struct Cleanup {
    fs::path dir;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
  } cleanup{dir};

  {
    std::ofstream out(lp);
    out << write_lp(problem);
    if (!out) throw AdapterError("cannot write " + lp.string(), "");
  }

  std::string cmd = command_template_;
  replace_all(cmd, "{lp}", shell_quote(lp.string()));
  replace_all(cmd, "{sol}", shell_quote(sol.string()));
  cmd += " 2>&1";

  std::string output;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw AdapterError("cannot launch external solver", "");
  std::array<char, 4096> chunk{};
  while (std::size_t got = std::fread(chunk.data(), 1, chunk.size(), pipe)) output.append(chunk.data(), got);
  const int rc = pclose(pipe);
  if (rc == -1 || !WIFEXITED(rc) || WEXITSTATUS(rc) != 0) {
    const int code = (rc != -1 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
    throw AdapterError("external solver failed with exit code " + std::to_string(code), output);
  }
  if (!fs::exists(sol)) throw AdapterError("external solver wrote no solution file", output);

  MilpSolution result;
  try {
    result = parse_solution_file(read_file(sol), problem);
  } catch (const std::exception& e) {
    throw AdapterError(std::string("cannot parse solver solution: ") + e.what(), output);
  }
  if (result.has_incumbent && !result.values.empty()) {
    auto bad = check_solution(problem, result.values);
    if (!bad.empty())
      throw AdapterError("external solution violates " + std::to_string(bad.size()) + " constraints", output);
  }
  return result;
}

}  // namespace windcommit
