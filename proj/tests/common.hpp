#pragma once

#include <string>
#include <vector>

#include "chfis/chfis.hpp"

namespace chfis_test {

inline std::string data_path(const std::string& name) {
    return std::string(CHFIS_DATA_DIR) + "/" + name;
}

/// The bundled 3x3 sample dataset.
inline chfis::GeneralizedDataset table1() {
    return chfis::GeneralizedDataset::validate(
        {0, 1, 2}, {0, 1, 2},
        chfis::Grid2(3, 3,
                     {0.3, 0.5, 0.6,  //
                      0.7, 0.4, 0.6,  //
                      0.8, 0.5, 0.6}),
        chfis::Grid2(3, 3,
                     {0.3, 0.4, 0.5,  //
                      0.7, 0.8, 0.5,  //
                      0.6, 0.8, 0.9}));
}

inline chfis::IfsParameters table1_params() {
    return chfis::IfsParameters::uniform(0.7, 0.4, 0.5, 2, 2);
}

inline chfis::IfsModel table1_model() {
    return chfis::build_model(table1(), table1_params());
}

/// Seeded dataset with dyadic-friendly axes and O(1) values.
inline chfis::GeneralizedDataset random_dataset(std::mt19937_64& rng,
                                                std::size_t n_cells,
                                                std::size_t m_cells) {
    std::vector<double> xs(n_cells + 1), ys(m_cells + 1);
    for (std::size_t i = 0; i <= n_cells; ++i) xs[i] = static_cast<double>(i);
    for (std::size_t j = 0; j <= m_cells; ++j) ys[j] = static_cast<double>(j);
    chfis::Grid2 zs(n_cells + 1, m_cells + 1), ts(n_cells + 1, m_cells + 1);
    for (double& v : zs.v) v = chfis::uniform_double(rng, -1.0, 1.0);
    for (double& v : ts.v) v = chfis::uniform_double(rng, -1.0, 1.0);
    return chfis::GeneralizedDataset::validate(xs, ys, zs, ts);
}

/// Seeded valid parameters, per-cell matrices.
inline chfis::IfsParameters random_parameters(std::mt19937_64& rng,
                                              std::size_t n_cells,
                                              std::size_t m_cells) {
    chfis::Grid2 a(n_cells, m_cells), b(n_cells, m_cells), g(n_cells, m_cells);
    for (std::size_t k = 0; k < a.v.size(); ++k) {
        a.v[k] = chfis::uniform_double(rng, -0.9, 0.9);
        g.v[k] = chfis::uniform_double(rng, -0.9, 0.9);
        const double room = 0.95 - std::abs(g.v[k]);
        b.v[k] = chfis::uniform_double(rng, -room, room);
    }
    return chfis::IfsParameters::validate(a, b, g);
}

}  // namespace chfis_test
