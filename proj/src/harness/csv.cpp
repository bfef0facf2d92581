#include "bftsim/errors.hpp"
#include "bftsim/harness.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace bftsim::harness {

namespace {

const char* const kHeader =
    "variable,value,curve,label,protocol,topology,n,n_f,tau0,rs,c,sim_mean,sim_n,model,model_improved,q,tau0_star";
constexpr std::size_t kColumns = 17;

// Shortest text that parses back to the same double.
std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string number(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells(1);
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_quotes) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (ch == '"') {
        in_quotes = false;
      } else {
        cells.back() += ch;
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      cells.emplace_back();
    } else {
      cells.back() += ch;
    }
  }
  return cells;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("bad number in CSV: '" + s + "'");
  return v;
}

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

int parse_int(const std::string& s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("bad integer in CSV: '" + s + "'");
  return v;
}

}  // namespace

void write_csv(const ResultSeries& series, std::ostream& out) {
  out << kHeader << '\n';
  const std::string var = to_string(series.variable);
  for (const auto& p : series.points) {
    out << var << ',' << number(p.value) << ',' << p.curve << ',' << quoted(p.label) << ',' << p.protocol << ','
        << quoted(p.topology) << ',' << p.n << ',' << p.n_f << ',' << number(p.tau0) << ',' << number(p.rs) << ','
        << p.chains << ',' << number(p.sim_mean) << ',' << p.sim_n << ',' << number(p.model) << ','
        << number(p.model_improved) << ',' << number(p.q) << ',' << number(p.tau0_star) << '\n';
  }
}

void export_csv(const ResultSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  write_csv(series, out);
  if (!out) throw ConfigError("write failed for " + path);
}

ResultSeries read_csv(std::istream& in) {
  ResultSeries series;
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw ConfigError("CSV header mismatch");
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != kColumns) throw ConfigError("CSV row has " + std::to_string(cells.size()) + " cells");
    const SweepVariable var = parse_sweep_variable(cells[0]);
    if (first) {
      series.variable = var;
      first = false;
    } else if (var != series.variable) {
      throw ConfigError("CSV mixes sweep variables");
    }
    SeriesPoint p;
    p.value = parse_double(cells[1]);
    p.curve = parse_int(cells[2]);
    p.label = cells[3];
    p.protocol = cells[4];
    p.topology = cells[5];
    p.n = parse_int(cells[6]);
    p.n_f = parse_int(cells[7]);
    p.tau0 = parse_double(cells[8]);
    p.rs = parse_double(cells[9]);
    p.chains = parse_int(cells[10]);
    p.sim_mean = parse_optional(cells[11]);
    p.sim_n = static_cast<std::size_t>(parse_int(cells[12]));
    p.model = parse_optional(cells[13]);
    p.model_improved = parse_optional(cells[14]);
    p.q = parse_optional(cells[15]);
    p.tau0_star = parse_optional(cells[16]);
    series.points.push_back(std::move(p));
  }
  return series;
}

ResultSeries import_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return read_csv(in);
}

}  // namespace bftsim::harness
