#include "stochlyap/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace stochlyap::io {

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorKind::ConfigParse, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) parse_error(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::vector<double> doubles(const Json& j, const char* what) {
  if (!j.is_array()) parse_error(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) parse_error(std::string(what) + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::size_t> indices(const Json& j, const char* what) {
  if (!j.is_array()) parse_error(std::string(what) + " must be an array of indices");
  std::vector<std::size_t> out;
  for (const auto& x : j) {
    if (!x.is_number_unsigned() && !(x.is_number_integer() && x.get<long long>() >= 0))
      parse_error(std::string(what) + " must hold non-negative integers");
    out.push_back(x.get<std::size_t>());
  }
  return out;
}

}  // namespace

Matrix matrix_from_json(const Json& j) {
  const Json& rows = j.is_object() ? field(j, "rows") : j;
  if (!rows.is_array() || rows.empty()) parse_error("matrix rows must be a nonempty array");
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto first = doubles(rows.front(), "matrix row");
  const auto c = static_cast<Eigen::Index>(first.size());
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto row = doubles(rows[static_cast<std::size_t>(i)], "matrix row");
    if (static_cast<Eigen::Index>(row.size()) != c)
      throw Error(ErrorKind::DimensionMismatch, "matrix row " + std::to_string(i) + " has the wrong length",
                  static_cast<long>(i));
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = row[static_cast<std::size_t>(k)];
  }
  if (j.is_object() && j.contains("n") && (j.at("n").get<long long>() != r || r != c))
    throw Error(ErrorKind::DimensionMismatch, "declared n does not match the rows");
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return Json{{"n", m.rows()}, {"rows", std::move(rows)}};
}

Vector vector_from_json(const Json& j) {
  const auto v = doubles(j, "vector");
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

SequenceModel sequence_model_from_json(const Json& j, std::uint64_t seed) {
  const std::string type = field(j, "type").get<std::string>();
  if (type == "iid") return SequenceModel::iid(doubles(field(j, "weights"), "weights"), seed);
  if (type == "markov")
    return SequenceModel::markov(doubles(field(j, "initial"), "initial"), matrix_from_json(field(j, "transition")),
                                 seed);
  if (type == "stationary_markov") return SequenceModel::stationary_markov(matrix_from_json(field(j, "transition")), seed);
  if (type == "scripted") return SequenceModel::scripted(indices(field(j, "indices"), "indices"), seed);
  parse_error("unknown sequence model type '" + type + "'");
}

Json sequence_model_to_json(const SequenceModel& model) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Iid>)
          return Json{{"type", "iid"}, {"weights", v.weights}};
        else if constexpr (std::is_same_v<T, MarkovModulated>)
          return Json{{"type", "markov"}, {"initial", v.initial}, {"transition", matrix_to_json(v.transition)}};
        else
          return Json{{"type", "scripted"}, {"indices", v.indices}};
      },
      model.variant());
}

DirectedGraph graph_from_json(const Json& j) {
  const auto n = field(j, "n").get<std::size_t>();
  DirectedGraph g(n);
  if (j.contains("edges"))
    for (const auto& e : j.at("edges")) {
      const auto ends = indices(e, "edge");
      if (ends.size() != 2) parse_error("edges must be [from, to] pairs");
      g.add_edge(ends[0], ends[1]);
    }
  if (j.value("self_loops", false)) g.add_self_loops();
  return g;
}

Json graph_to_json(const DirectedGraph& g) {
  Json edges = Json::array();
  for (const auto& [a, b] : g.edges()) edges.push_back({a, b});
  return Json{{"n", g.size()}, {"edges", std::move(edges)}};
}

PartitionedLinearSystem system_from_json(const Json& j) {
  std::vector<EquationBlock> blocks;
  for (const auto& blk : field(j, "blocks")) {
    EquationBlock eb;
    const Json& a = field(blk, "A");
    const Json& b = field(blk, "b");
    if (a.is_array() && a.empty()) {
      eb.a = Matrix(0, field(blk, "m").get<Eigen::Index>());
      eb.b = Vector(0);
    } else {
      eb.a = matrix_from_json(a);
      eb.b = vector_from_json(b);
    }
    blocks.push_back(std::move(eb));
  }
  return PartitionedLinearSystem(std::move(blocks));
}

AsyncClockModel clocks_from_json(const Json& j, std::uint64_t seed) {
  const std::string type = field(j, "type").get<std::string>();
  const auto rates = doubles(field(j, "rates"), "rates");
  if (type == "bernoulli") return AsyncClockModel::bernoulli(rates, seed);
  if (type == "poisson") return AsyncClockModel::poisson(rates, j.value("dt", 1.0), seed);
  parse_error("unknown clock type '" + type + "'");
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    parse_error(path.string() + ": " + e.what());
  }
}

void write_atomically(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace stochlyap::io
