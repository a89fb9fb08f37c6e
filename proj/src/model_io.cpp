#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "krot/krylov.hpp"

namespace krot {

namespace {

using nlohmann::json;

// Line and column of a byte offset, for parse diagnostics.
std::pair<std::size_t, std::size_t> locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_with_context(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = locate(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("line " + std::to_string(line) + ", column " +
                     std::to_string(col) + ": " + e.what());
  }
}

}  // namespace

std::string hamiltonian_to_json(const HermitianXcd& matrix) {
  const Eigen::Index d = matrix.dim();
  json entries = json::array();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      entries.push_back({matrix.mat()(i, j).real(), matrix.mat()(i, j).imag()});
  json doc;
  doc["dim"] = d;
  doc["entries"] = std::move(entries);
  return doc.dump(2) + "\n";
}

HamiltonianModel hamiltonian_from_json(const std::string& text) {
  const json doc = parse_with_context(text);
  if (!doc.is_object() || !doc.contains("dim") || !doc.contains("entries"))
    throw ParseError("matrix JSON needs fields 'dim' and 'entries'");
  for (const auto& item : doc.items())
    if (item.key() != "dim" && item.key() != "entries")
      throw ParseError("unknown field '" + item.key() + "'");
  if (!doc["dim"].is_number_integer() || doc["dim"].get<long long>() < 1)
    throw ParseError("'dim' must be a positive integer");
  const Eigen::Index d = doc["dim"].get<Eigen::Index>();
  const json& entries = doc["entries"];
  if (!entries.is_array() ||
      entries.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(d))
    throw ParseError("'entries' must hold dim^2 = " + std::to_string(d * d) +
                     " pairs, got " + std::to_string(entries.size()));
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const json& cell = entries[static_cast<std::size_t>(i * d + j)];
      if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() ||
          !cell[1].is_number())
        throw ParseError("entry (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") must be a [re, im] pair");
      m(i, j) = Complex(cell[0].get<double>(), cell[1].get<double>());
    }
  }
  return make_hamiltonian_model(HermitianXcd(m));
}

HamiltonianModel load_hamiltonian(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return hamiltonian_from_json(buf.str());
}

void save_hamiltonian(const HermitianXcd& matrix, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << hamiltonian_to_json(matrix);
}

}  // namespace krot
