#ifndef SEMIFLOW_MEASURES_HPP
#define SEMIFLOW_MEASURES_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace semiflow {

// Weighted point cloud representing a Borel probability measure on R^n.
// Weights are strictly positive and sum to 1; a deviation of up to 1e-9 in
// the supplied weights is renormalized at construction, anything larger is
// rejected. Instances are immutable after construction.
class EmpiricalMeasure {
  public:
    EmpiricalMeasure(std::vector<double> flat_points, std::size_t dim,
                     std::vector<double> weights);
    EmpiricalMeasure(const std::vector<std::vector<double>>& points,
                     std::vector<double> weights);

    static EmpiricalMeasure dirac(std::vector<double> point);

    std::size_t size() const { return weights_.size(); }
    std::size_t dim() const { return dim_; }
    std::span<const double> point(std::size_t i) const {
        return {points_.data() + i * dim_, dim_};
    }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& flat_points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }

  private:
    std::vector<double> points_;  // size() * dim(), row-major
    std::size_t dim_;
    std::vector<double> weights_;
};

using PointMap = std::function<std::vector<double>(std::span<const double>)>;
using ScalarFn = std::function<double(std::span<const double>)>;

// Image measure: points are mapped, weights are untouched.
EmpiricalMeasure push_forward(const EmpiricalMeasure& mu, const PointMap& map);

// sum_i w_i g(p_i)
double moment(const EmpiricalMeasure& mu, const ScalarFn& g);

// sum over {i : g(p_i) >= R} of w_i g(p_i); nonincreasing in R.
double tail_mass(const EmpiricalMeasure& mu, const ScalarFn& g, double R);

// Exact 1-Wasserstein distance of two measures on R, by integrating the
// absolute CDF difference between consecutive support points.
double wasserstein1_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

// Finite family of 1-bounded 1-Lipschitz test functions h_j(x) =
// tanh(a_j . x + b_j) with |a_j| <= 1, drawn deterministically from a seed.
// Stands in for the countable family in the narrow-convergence metric; the
// truncated sum below is a lower bound of the full metric.
class LipschitzDictionary {
  public:
    LipschitzDictionary(std::size_t dim, std::size_t size, std::uint64_t seed);
    std::size_t size() const { return slopes_.size(); }
    std::size_t dim() const { return dim_; }
    double evaluate(std::size_t j, std::span<const double> x) const;
    // Max violation of |h(x)-h(y)| <= |x-y| and |h| <= 1 over sampled pairs.
    double sampled_violation(std::size_t samples, std::uint64_t seed) const;

  private:
    std::size_t dim_;
    std::vector<std::vector<double>> slopes_;
    std::vector<double> offsets_;
};

// sum_j 2^{-j} |int h_j dmu - int h_j dnu|, truncated at the dictionary size.
double bl_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                   const LipschitzDictionary& dict);

// CSV schema: header `w,p1,...,pn`, one row per support point, 17
// significant digits.
void write_measure_csv(const EmpiricalMeasure& mu, std::ostream& out);
void write_measure_csv(const EmpiricalMeasure& mu, const std::string& path);
EmpiricalMeasure read_measure_csv(const std::string& path);

}  // namespace semiflow

#endif
