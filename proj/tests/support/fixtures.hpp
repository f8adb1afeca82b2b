#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "ehypo/fit.hpp"

namespace fixture {

// The bundled remission-times dataset (128 observations).
inline ehypo::Sample bladder_cancer() {
    const std::string path = std::string(EHYPO_DATA_DIR) + "/bladder_cancer.csv";
    std::ifstream in(path);
    std::vector<double> values;
    double v = 0.0;
    while (in >> v) values.push_back(v);
    return ehypo::Sample(std::move(values));
}

} // namespace fixture
