#include "semiflow/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "semiflow/csvio.hpp"
#include "semiflow/rng.hpp"

namespace semiflow {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> flat_points,
                                   std::size_t dim,
                                   std::vector<double> weights)
    : points_(std::move(flat_points)), dim_(dim), weights_(std::move(weights)) {
    if (dim_ == 0) throw std::invalid_argument("EmpiricalMeasure: dim must be >= 1");
    if (weights_.empty())
        throw std::invalid_argument("EmpiricalMeasure: needs at least one support point");
    if (points_.size() != weights_.size() * dim_)
        throw std::invalid_argument("EmpiricalMeasure: points/weights length mismatch");
    for (double p : points_)
        if (!std::isfinite(p))
            throw std::invalid_argument("EmpiricalMeasure: non-finite coordinate");
    double sum = 0.0;
    for (double w : weights_) {
        if (!(w > 0.0))
            throw std::invalid_argument("EmpiricalMeasure: weights must be strictly positive");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("EmpiricalMeasure: weights sum to " +
                                    format_double(sum) + ", expected 1 within 1e-9");
    for (double& w : weights_) w /= sum;
}

EmpiricalMeasure::EmpiricalMeasure(const std::vector<std::vector<double>>& points,
                                   std::vector<double> weights)
    : EmpiricalMeasure(
          [&points] {
              std::vector<double> flat;
              for (const auto& p : points)
                  flat.insert(flat.end(), p.begin(), p.end());
              return flat;
          }(),
          points.empty() ? 1 : points.front().size(), std::move(weights)) {
    for (const auto& p : points)
        if (p.size() != dim_)
            throw std::invalid_argument("EmpiricalMeasure: ragged point list");
}

EmpiricalMeasure EmpiricalMeasure::dirac(std::vector<double> point) {
    const std::size_t d = point.size();
    return EmpiricalMeasure(std::move(point), d, {1.0});
}

EmpiricalMeasure push_forward(const EmpiricalMeasure& mu, const PointMap& map) {
    std::vector<double> flat;
    flat.reserve(mu.flat_points().size());
    std::size_t out_dim = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        std::vector<double> image;
        try {
            image = map(mu.point(i));
        } catch (const std::exception& e) {
            throw std::runtime_error("push_forward: map failed on support point " +
                                     std::to_string(i) + ": " + e.what());
        }
        for (double v : image)
            if (!std::isfinite(v))
                throw std::runtime_error(
                    "push_forward: map produced non-finite value on support point " +
                    std::to_string(i));
        if (i == 0)
            out_dim = image.size();
        else if (image.size() != out_dim)
            throw std::runtime_error("push_forward: map changed dimension on support point " +
                                     std::to_string(i));
        flat.insert(flat.end(), image.begin(), image.end());
    }
    return EmpiricalMeasure(std::move(flat), out_dim, mu.weights());
}

double moment(const EmpiricalMeasure& mu, const ScalarFn& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weight(i) * g(mu.point(i));
    return s;
}

double tail_mass(const EmpiricalMeasure& mu, const ScalarFn& g, double R) {
    if (R < 0.0) throw std::invalid_argument("tail_mass: R must be >= 0");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double v = g(mu.point(i));
        if (v >= R) s += mu.weight(i) * v;
    }
    return s;
}

double wasserstein1_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (mu.dim() != 1 || nu.dim() != 1)
        throw std::invalid_argument("wasserstein1_1d: measures must live on R");
    struct Atom {
        double x, wmu, wnu;
    };
    std::vector<Atom> atoms;
    atoms.reserve(mu.size() + nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        atoms.push_back({mu.point(i)[0], mu.weight(i), 0.0});
    for (std::size_t i = 0; i < nu.size(); ++i)
        atoms.push_back({nu.point(i)[0], 0.0, nu.weight(i)});
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.x < b.x; });
    // W1 = int |F_mu(x) - F_nu(x)| dx; the CDF difference is constant
    // between consecutive atoms.
    double dist = 0.0, cdf_diff = 0.0;
    for (std::size_t i = 0; i + 1 <= atoms.size(); ++i) {
        cdf_diff += atoms[i].wmu - atoms[i].wnu;
        if (i + 1 < atoms.size())
            dist += std::fabs(cdf_diff) * (atoms[i + 1].x - atoms[i].x);
    }
    return dist;
}

LipschitzDictionary::LipschitzDictionary(std::size_t dim, std::size_t size,
                                         std::uint64_t seed)
    : dim_(dim) {
    if (dim == 0 || size == 0)
        throw std::invalid_argument("LipschitzDictionary: dim and size must be >= 1");
    Rng rng(seed);
    slopes_.reserve(size);
    offsets_.reserve(size);
    for (std::size_t j = 0; j < size; ++j) {
        std::vector<double> a = rng.gaussian_vec(dim);
        double norm = 0.0;
        for (double v : a) norm += v * v;
        norm = std::sqrt(norm);
        const double scale = norm > 0.0 ? rng.uniform() / norm : 0.0;
        for (double& v : a) v *= scale;  // |a| <= 1 so Lip(h) <= 1
        slopes_.push_back(std::move(a));
        offsets_.push_back(rng.uniform(-2.0, 2.0));
    }
}

double LipschitzDictionary::evaluate(std::size_t j, std::span<const double> x) const {
    if (x.size() != dim_)
        throw std::invalid_argument("LipschitzDictionary: dimension mismatch");
    double s = offsets_[j];
    for (std::size_t c = 0; c < dim_; ++c) s += slopes_[j][c] * x[c];
    const double v = std::tanh(s);
    return std::clamp(v, -1.0, 1.0);
}

double LipschitzDictionary::sampled_violation(std::size_t samples,
                                              std::uint64_t seed) const {
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        std::vector<double> x = rng.gaussian_vec(dim_);
        std::vector<double> y = rng.gaussian_vec(dim_);
        double dxy = 0.0;
        for (std::size_t c = 0; c < dim_; ++c) dxy += (x[c] - y[c]) * (x[c] - y[c]);
        dxy = std::sqrt(dxy);
        for (std::size_t j = 0; j < size(); ++j) {
            const double hx = evaluate(j, x);
            const double hy = evaluate(j, y);
            worst = std::max(worst, std::fabs(hx) - 1.0);
            worst = std::max(worst, std::fabs(hx - hy) - dxy);
        }
    }
    return worst;
}

double bl_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                   const LipschitzDictionary& dict) {
    if (mu.dim() != nu.dim())
        throw std::invalid_argument("bl_distance: measures on different spaces");
    if (mu.dim() != dict.dim())
        throw std::invalid_argument("bl_distance: dictionary dimension mismatch");
    double dist = 0.0, pow2 = 1.0;
    for (std::size_t j = 0; j < dict.size(); ++j) {
        pow2 *= 0.5;
        double imu = 0.0, inu = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i)
            imu += mu.weight(i) * dict.evaluate(j, mu.point(i));
        for (std::size_t i = 0; i < nu.size(); ++i)
            inu += nu.weight(i) * dict.evaluate(j, nu.point(i));
        dist += pow2 * std::fabs(imu - inu);
    }
    return dist;
}

void write_measure_csv(const EmpiricalMeasure& mu, std::ostream& out) {
    out << "w";
    for (std::size_t c = 1; c <= mu.dim(); ++c) out << ",p" << c;
    out << "\n";
    for (std::size_t i = 0; i < mu.size(); ++i) {
        out << format_double(mu.weight(i));
        for (double v : mu.point(i)) out << "," << format_double(v);
        out << "\n";
    }
}

void write_measure_csv(const EmpiricalMeasure& mu, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_measure_csv(mu, out);
}

EmpiricalMeasure read_measure_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header.empty() || table.header[0] != "w")
        throw std::runtime_error("measure CSV must start with a 'w' column: " + path);
    const std::size_t dim = table.header.size() - 1;
    std::vector<double> flat, weights;
    for (const auto& row : table.rows) {
        weights.push_back(row[0]);
        for (std::size_t c = 1; c < row.size(); ++c) flat.push_back(row[c]);
    }
    return EmpiricalMeasure(std::move(flat), dim, std::move(weights));
}

}  // namespace semiflow
