#pragma once

#include "gdglmm/dataset.hpp"
#include "gdglmm/model_spec.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace test_support {

inline gdglmm::Dataset csv(const std::string& text, const std::set<std::string>& categorical = {}) {
    std::istringstream in(text);
    return gdglmm::load_dataset(in, categorical);
}

inline gdglmm::ModelSpec spec(const std::string& text) { return gdglmm::parse_model_spec(text); }

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("gdglmm_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Random-intercept logistic data: m groups of size n, one covariate x.
inline gdglmm::Dataset grouped_logistic(int m, int n, unsigned seed, double b0 = -0.5, double bx = 1.0,
                                        double sigma = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u01;
    std::ostringstream out;
    out << "g,x,y\n";
    for (int i = 0; i < m; ++i) {
        const double ui = sigma * z(rng);
        for (int j = 0; j < n; ++j) {
            const double x = z(rng);
            const double eta = b0 + bx * x + ui;
            const int y = u01(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
            out << "g" << i + 1 << ',' << x << ',' << y << '\n';
        }
    }
    return csv(out.str());
}

}  // namespace test_support
