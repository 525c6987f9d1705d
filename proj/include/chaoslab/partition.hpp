#pragma once

#include "chaoslab/combinatorics.hpp"
#include "chaoslab/test_functions.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace chaoslab {

/// Universal constant of the two-sided exponential-moment bound, 1600^2 + 36 e^4.
inline constexpr double kDoubleSumConstant = 1600.0 * 1600.0 + 36.0 * 54.598150033144236;

/// C = 2 (1 + 10 a/(1-a)^3 + b/(1-b)), a = (e s)^4, b = (sqrt(2e) s)^4 for s = ||psi||_inf.
/// Throws OutOfHypothesis when s >= 1/(2e).
double squared_sum_bound(double psi_inf);

/// gamma = C G^2 for the growth norm G.
double double_sum_gamma(double growth, double constant = kDoubleSumConstant);

/// 2 / (1 - gamma); throws OutOfHypothesis when gamma >= 1 or gamma < 0.
double double_sum_bound(double gamma);

struct GrowthNorm {
    double value = 0.0;     ///< max over evaluated p of ||sup_z |phi(., z)| ||_{L^p(rho_bar)} / p
    int best_p = 1;
    int evaluated = 0;      ///< number of p values evaluated
    bool stopped_early = false;
    double sup = 0.0;       ///< max over x of sup_z |phi(x, z)|
};

/// Integer sweep p = 1..p_max, stopping after 8 consecutive decreases of the ratio.
GrowthNorm growth_norm(const TestFunctionPair& tf, int p_max = 64, int nodes = 1024);

/// max |phi(x, z)| over a dense grid refined by local golden-section search.
double sup_norm(const TestFunctionPair& tf, int nodes = 512);

enum class PartitionVariant {
    SquaredSum,  ///< exp((1/N) (sum_j psi(x_1, x_j))^2), needs the z-side cancellation
    DoubleSum,   ///< exp((1/N) sum_{i,j} phi(x_i, x_j)), needs both cancellations
};
enum class PartitionMode { Quadrature, MonteCarlo };

std::string to_string(PartitionVariant v);
std::string to_string(PartitionMode m);

struct PartitionOptions {
    PartitionVariant variant = PartitionVariant::DoubleSum;
    PartitionMode mode = PartitionMode::Quadrature;
    int nodes = 64;                    ///< quadrature nodes per axis
    std::uint64_t samples = 1000000;   ///< Monte Carlo budget
    std::uint64_t seed = 1;
    double double_sum_constant = kDoubleSumConstant;
};

/// Expectation of the exponential under rho_bar^N, by tensor trapezoid quadrature (N <= 4,
/// nodes <= 256) or Monte Carlo, compared with the matching closed-form bound.
/// Throws InvalidArgument when the required cancellation flags are not declared,
/// OutOfHypothesis when the bound's hypothesis fails, NumericalError on exponent overflow.
BoundReport partition_function(const TestFunctionPair& tf, int N, const PartitionOptions& options);

/// Tensor trapezoid value of the partition function alone.
double partition_quadrature(const TestFunctionPair& tf, int N, PartitionVariant variant, int nodes);

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};
MonteCarloEstimate partition_monte_carlo(const TestFunctionPair& tf, int N, PartitionVariant variant,
                                         std::uint64_t samples, std::uint64_t seed);

struct CancellationResult {
    double value = 0.0;
    int m = 0;           ///< singleton count of I
    int n = 0;           ///< repeated count of I
    bool in_j_set = false;
    bool pass = true;    ///< |value| < 1e-8 whenever J lies outside J_{m,n}
};

/// integral of prod_nu phi(x_{i_nu}, x_{j_nu}) under rho_bar^N by iterated trapezoid quadrature
/// (the rank expansion makes every term a product of one-dimensional integrals).
/// Requires I in reduced form, both cancellation flags, N <= 4 and nodes <= 256.
CancellationResult verify_cancellation(std::span<const int> I, std::span<const int> J, const TestFunctionPair& tf,
                                       int N, int nodes = 128);

struct ChangeOfLaw {
    double lhs = 0.0;
    double rhs = 0.0;
    double entropy = 0.0;  ///< (1/N) sum rho log(rho / rho_bar)
    bool pass = false;
};

/// sum Phi rho <= (1/eta) (H + (1/N) log sum rho_bar exp(N eta Phi)) on a finite space.
ChangeOfLaw change_of_law_check(std::span<const double> rho, std::span<const double> rho_bar,
                                std::span<const double> phi, double eta, int N);

} // namespace chaoslab
