#include "chaos_anneal/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstring>
#include <sstream>

#include "chaos_anneal/errors.hpp"

namespace chaos_anneal::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text, const std::string& key) {
  text = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError(key, "expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(std::string_view text, const std::string& key) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

bool parse_bool(std::string_view text, const std::string& key) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + std::string(text) + "'");
}

std::vector<double> parse_double_list(std::string_view text, const std::string& key) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (auto part : split(text, ',')) out.push_back(parse_double(part, key));
  return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns,
                     const std::vector<std::string>& comments)
    : out_(path), columns_(columns.size()) {
  if (!out_) throw Error("cannot write " + path.string());
  for (const auto& c : comments) out_ << "# " << c << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != columns_) throw MisuseError("CSV row width differs from the header");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
  out_ << '\n';
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("column", "no column named '" + name + "'");
  const auto idx = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[idx]);
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (t.columns.empty()) {
      for (auto c : split(line, ',')) t.columns.emplace_back(c);
      continue;
    }
    std::vector<double> r;
    for (auto c : split(line, ',')) r.push_back(parse_double(c, path.filename().string()));
    if (r.size() != t.columns.size()) throw Error("ragged row in " + path.string());
    t.rows.push_back(std::move(r));
  }
  return t;
}

Ini read_ini(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(path.filename().string(), e.message() + " at line " + std::to_string(e.line()));
  }
  Ini ini;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section, "keys must live inside a [section]");
    auto& dst = ini[section];
    for (const auto& [key, value] : body) {
      std::string v = value.get_value<std::string>();
      // Allow trailing comments after values.
      if (const auto pos = v.find_first_of(";#"); pos != std::string::npos) v = std::string(trim(v.substr(0, pos)));
      dst[key] = v;
    }
  }
  return ini;
}

void write_ini(const std::filesystem::path& path, const Ini& ini) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  bool first = true;
  for (const auto& [section, body] : ini) {
    out << (first ? "" : "\n") << '[' << section << "]\n";
    first = false;
    for (const auto& [key, value] : body) out << key << " = " << value << '\n';
  }
}

namespace {
constexpr std::array<char, 4> kMagic{'C', 'A', 'D', 'M'};

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& in, const std::string& name) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw Error("truncated density file " + name);
  return v;
}
}  // namespace

void write_density_binary(const std::filesystem::path& path, const hilbert::DensityMatrix& rho,
                          std::uint64_t dim_a, std::uint64_t dim_b) {
  const auto rows = static_cast<std::uint64_t>(rho.entries.rows());
  const auto cols = static_cast<std::uint64_t>(rho.entries.cols());
  if (dim_a * dim_b != rows || rows != cols) throw InvalidParameter("density matrix does not match dim_a * dim_b");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put(out, kDensityFormatVersion);
  put(out, rows);
  put(out, cols);
  put(out, dim_a);
  put(out, dim_b);
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c) {
      const auto z = rho.entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      put(out, z.real());
      put(out, z.imag());
    }
  }
}

DensityFile read_density_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(path.string() + " is not a density-matrix file");
  const auto name = path.string();
  const auto version = get<std::uint32_t>(in, name);
  if (version != kDensityFormatVersion) throw Error("unsupported density file version " + std::to_string(version));
  const auto rows = get<std::uint64_t>(in, name);
  const auto cols = get<std::uint64_t>(in, name);
  DensityFile f;
  f.dim_a = get<std::uint64_t>(in, name);
  f.dim_b = get<std::uint64_t>(in, name);
  if (rows != cols || f.dim_a * f.dim_b != rows) throw Error("inconsistent header in " + name);
  f.rho.entries.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c) {
      const double re = get<double>(in, name);
      const double im = get<double>(in, name);
      f.rho.entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = {re, im};
    }
  }
  return f;
}

void write_density_csv(const std::filesystem::path& path, const hilbert::DensityMatrix& rho) {
  CsvWriter w(path, {"row", "col", "re", "im"});
  for (Eigen::Index r = 0; r < rho.entries.rows(); ++r) {
    for (Eigen::Index c = 0; c < rho.entries.cols(); ++c) {
      w.row({static_cast<double>(r), static_cast<double>(c), rho.entries(r, c).real(), rho.entries(r, c).imag()});
    }
  }
}

}  // namespace chaos_anneal::io
