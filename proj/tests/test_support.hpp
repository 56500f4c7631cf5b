#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

namespace testing_support {

/// Standard normal CDF by composite Simpson quadrature of the density from 0 to z.
inline double simpson_normal_cdf(double z) {
    const int n = 4000;
    const double h = z / n;
    auto pdf = [](double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); };
    double s = pdf(0.0) + pdf(z);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
    return 0.5 + s * h / 3.0;
}

/// Inverse of simpson_normal_cdf by bisection.
inline double simpson_normal_quantile(double q) {
    double lo = -10.0;
    double hi = 10.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (simpson_normal_cdf(mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("ballistic_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace testing_support
