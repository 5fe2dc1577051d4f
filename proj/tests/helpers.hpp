#pragma once

#include <map>
#include <string>
#include <vector>

#include "eden/providers/table_model.hpp"
#include "eden/random.hpp"

namespace eden::test {

inline std::string data_path(const std::string& name) { return std::string(EDEN_DATA_DIR) + "/" + name; }

inline Vocabulary abc_vocab() { return Vocabulary({"A", "B", "<eos>"}, "<eos>"); }

/// The three-token toy model bundled as data/toy_model.json.
inline TableModel toy_model() { return TableModel::load(data_path("toy_model.json")); }

inline TokenDistribution random_full(std::size_t n, Rng& rng, double concentration = 1.0) {
    return TokenDistribution::from_probabilities(sample_dirichlet(n, concentration, rng), true);
}

/// Dirichlet row with concentration log-uniform in [0.05, 20].
inline TokenDistribution random_mixed(std::size_t n, Rng& rng) {
    const double c = std::exp(std::log(0.05) + uniform01(rng) * (std::log(20.0) - std::log(0.05)));
    return random_full(n, rng, c);
}

}  // namespace eden::test
