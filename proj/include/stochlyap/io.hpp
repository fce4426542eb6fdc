#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "stochlyap/async.hpp"
#include "stochlyap/graph.hpp"
#include "stochlyap/linear_solver.hpp"
#include "stochlyap/matrix.hpp"
#include "stochlyap/sequence.hpp"

namespace stochlyap::io {

using Json = nlohmann::json;

/// Matrices are {"n": n, "rows": [[...], ...]} or a bare array of rows.
Matrix matrix_from_json(const Json& j);
Json matrix_to_json(const Matrix& m);
Vector vector_from_json(const Json& j);
Json vector_to_json(const Vector& v);

/// {"type": "iid", "weights": [...]}
/// {"type": "markov", "initial": [...], "transition": matrix}
/// {"type": "stationary_markov", "transition": matrix}
/// {"type": "scripted", "indices": [...]}
SequenceModel sequence_model_from_json(const Json& j, std::uint64_t seed);
Json sequence_model_to_json(const SequenceModel& model);

/// {"n": n, "edges": [[from, to], ...], "self_loops": bool}
DirectedGraph graph_from_json(const Json& j);
Json graph_to_json(const DirectedGraph& g);

/// {"blocks": [{"A": rows, "b": [...]}, ...]}
PartitionedLinearSystem system_from_json(const Json& j);

/// {"type": "bernoulli" | "poisson", "rates": [...], "dt": 1.0}
AsyncClockModel clocks_from_json(const Json& j, std::uint64_t seed);

Json read_json_file(const std::filesystem::path& path);

/// Writes `content` to a sibling temporary file, then renames it over `path`.
void write_atomically(const std::filesystem::path& path, std::string_view content);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace stochlyap::io
