#include "evolvegen/sat/dimacs.hpp"

#include <charconv>
#include <sstream>

#include "evolvegen/common/error.hpp"

namespace evolvegen::sat {

std::string write_dimacs(const Cnf& cnf) {
  std::ostringstream out;
  out << "p cnf " << cnf.num_vars << ' ' << cnf.clauses.size() << '\n';
  for (const Clause& c : cnf.clauses) {
    for (Lit l : c) out << l.to_dimacs() << ' ';
    out << "0\n";
  }
  return out.str();
}

std::string write_dimacs(const Solver& solver) {
  Cnf cnf;
  cnf.num_vars = solver.num_vars();
  cnf.clauses = solver.original_clauses();
  return write_dimacs(cnf);
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

long long parse_int(std::string_view tok, std::size_t line_no) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw FormatError("expected integer, got '" + std::string(tok) + "'", line_no);
  }
  return v;
}

}  // namespace

Cnf read_dimacs(std::string_view text) {
  Cnf cnf;
  bool have_header = false;
  long long declared_clauses = 0;
  Clause current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (toks[0] == "c" || toks[0][0] == 'c') continue;
    if (toks[0] == "p") {
      if (have_header) throw FormatError("duplicate header", line_no);
      if (toks.size() != 4 || toks[1] != "cnf") throw FormatError("malformed header", line_no);
      long long nv = parse_int(toks[2], line_no);
      declared_clauses = parse_int(toks[3], line_no);
      if (nv < 0 || declared_clauses < 0) throw FormatError("negative header count", line_no);
      cnf.num_vars = static_cast<int>(nv);
      have_header = true;
      continue;
    }
    if (!have_header) throw FormatError("clause before header", line_no);
    for (auto tok : toks) {
      long long v = parse_int(tok, line_no);
      if (v == 0) {
        cnf.clauses.push_back(std::move(current));
        current.clear();
        continue;
      }
      if (v > cnf.num_vars || -v > cnf.num_vars) {
        throw FormatError("literal " + std::to_string(v) + " exceeds declared variables", line_no);
      }
      current.push_back(Lit::from_dimacs(static_cast<int>(v)));
    }
    if (end == text.size()) break;
  }
  if (!have_header) throw FormatError("missing header", line_no);
  if (!current.empty()) throw FormatError("unterminated clause", line_no);
  if (static_cast<long long>(cnf.clauses.size()) != declared_clauses) {
    throw FormatError("header declares " + std::to_string(declared_clauses) + " clauses, found " +
                          std::to_string(cnf.clauses.size()),
                      line_no);
  }
  return cnf;
}

bool load(Solver& solver, const Cnf& cnf) {
  while (solver.num_vars() < cnf.num_vars) solver.new_var();
  bool ok = true;
  for (const Clause& c : cnf.clauses) ok = solver.add_clause(c) && ok;
  return ok;
}

}  // namespace evolvegen::sat
