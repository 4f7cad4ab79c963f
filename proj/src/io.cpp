#include "hazrate/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <variant>

#include <fmt/core.h>

#include "hazrate/error.hpp"

namespace hazrate {

std::string fmt6(double x) { return fmt::format("{:.6g}", x); }

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& raw, std::size_t line, const char* column) {
  const std::string s = trim(raw);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw InvalidInput(fmt::format("line {}: cannot parse {} from '{}'", line, column, raw));
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw InvalidInput(fmt::format("line {}: non-finite {}", line, column));
  }
  return value;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InvalidInput(fmt::format("cannot open '{}' for writing", path));
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput(fmt::format("cannot open '{}'", path));
  return is;
}

}  // namespace

void write_counting_rows(std::ostream& os, const std::vector<CountingRow>& rows) {
  os << "id,start,stop,treat,event\n";
  for (const auto& r : rows) {
    os << fmt::format("{},{:.6f},{:.6f},{},{}\n", r.id, r.start, r.stop, r.treat, r.event ? 1 : 0);
  }
}

std::vector<CountingRow> read_counting_rows(std::istream& is) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (!trim(line).empty()) break;
  }
  if (trim(line) != "id,start,stop,treat,event") {
    throw InvalidInput(fmt::format("expected header 'id,start,stop,treat,event', got '{}'", trim(line)));
  }
  std::vector<CountingRow> rows;
  while (std::getline(is, line)) {
    ++n;
    if (trim(line).empty()) continue;
    const auto c = split(line);
    if (c.size() != 5) throw InvalidInput(fmt::format("line {}: expected 5 columns, got {}", n, c.size()));
    CountingRow r;
    r.id = parse_number<std::int64_t>(c[0], n, "id");
    r.start = parse_number<double>(c[1], n, "start");
    r.stop = parse_number<double>(c[2], n, "stop");
    r.treat = parse_number<int>(c[3], n, "treat");
    const int ev = parse_number<int>(c[4], n, "event");
    if (ev != 0 && ev != 1) throw InvalidInput(fmt::format("line {}: event must be 0 or 1, got {}", n, ev));
    r.event = ev == 1;
    rows.push_back(r);
  }
  validate_counting_rows(rows);
  return rows;
}

void write_counting_rows_file(const std::string& path, const std::vector<CountingRow>& rows) {
  auto os = open_out(path);
  write_counting_rows(os, rows);
}

std::vector<CountingRow> read_counting_rows_file(const std::string& path) {
  auto is = open_in(path);
  return read_counting_rows(is);
}

void write_model(std::ostream& os, const IllnessDeathModel& model) {
  const auto* k = std::get_if<TwoPieceKernel>(&model.lambda12.representation());
  if (!k) throw InvalidInput("write_model: only two-piece kernels can be serialized");
  const Grid& g = model.grid();
  os << fmt::format("# kernel two_piece early={} late={} lag={}\n", k->early, k->late, k->lag);
  os << fmt::format("# grid t_max={} step={}\n", g.t_max(), g.step());
  os << "t,lambda01,lambda02\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    // 17 digits so the model reloads bit-for-bit
    os << fmt::format("{},{:.17g},{:.17g}\n", fmt6(g.time(i)), model.lambda01[i], model.lambda02[i]);
  }
}

IllnessDeathModel read_model(std::istream& is) {
  std::string line;
  std::size_t n = 0;
  double early = -1, late = -1, lag = -1, t_max = -1, step = -1;
  bool header = false;
  std::vector<double> l01, l02;
  auto key_value = [&](const std::string& body, const char* expect_kind) {
    std::istringstream ss(body);
    std::string word;
    ss >> word;  // "kernel" / "grid"
    if (std::string(expect_kind) == "kernel") {
      ss >> word;
      if (word != "two_piece") throw InvalidInput(fmt::format("line {}: unsupported kernel '{}'", n, word));
    }
    while (ss >> word) {
      const auto eq = word.find('=');
      if (eq == std::string::npos) throw InvalidInput(fmt::format("line {}: expected key=value, got '{}'", n, word));
      const std::string key = word.substr(0, eq);
      const double v = parse_number<double>(word.substr(eq + 1), n, key.c_str());
      if (key == "early") early = v;
      else if (key == "late") late = v;
      else if (key == "lag") lag = v;
      else if (key == "t_max") t_max = v;
      else if (key == "step") step = v;
      else throw InvalidInput(fmt::format("line {}: unknown key '{}'", n, key));
    }
  };
  while (std::getline(is, line)) {
    ++n;
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (s[0] == '#') {
      const std::string body = trim(s.substr(1));
      if (body.rfind("kernel", 0) == 0) key_value(body, "kernel");
      else if (body.rfind("grid", 0) == 0) key_value(body, "grid");
      continue;
    }
    if (!header) {
      if (s != "t,lambda01,lambda02") throw InvalidInput(fmt::format("line {}: expected header t,lambda01,lambda02", n));
      header = true;
      continue;
    }
    const auto c = split(s);
    if (c.size() != 3) throw InvalidInput(fmt::format("line {}: expected 3 columns, got {}", n, c.size()));
    l01.push_back(parse_number<double>(c[1], n, "lambda01"));
    l02.push_back(parse_number<double>(c[2], n, "lambda02"));
  }
  if (early < 0 || late < 0 || lag < 0) throw InvalidInput("model file lacks a '# kernel two_piece ...' line");
  if (t_max <= 0 || step <= 0) throw InvalidInput("model file lacks a '# grid t_max=... step=...' line");
  const Grid g(t_max, step);
  if (l01.size() != g.size()) {
    throw GridMismatch(fmt::format("model file has {} rows but the grid has {} nodes", l01.size(), g.size()));
  }
  return IllnessDeathModel(GridFunction(g, l01), GridFunction(g, l02), HazardKernel::two_piece(early, late, lag));
}

void write_model_file(const std::string& path, const IllnessDeathModel& model) {
  auto os = open_out(path);
  write_model(os, model);
}

IllnessDeathModel read_model_file(const std::string& path) {
  auto is = open_in(path);
  return read_model(is);
}

}  // namespace hazrate
