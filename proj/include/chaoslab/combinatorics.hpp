#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace chaoslab {

using BigInt = boost::multiprecision::cpp_int;

enum class BoundMethod { Enumeration, ClosedForm, Quadrature, MonteCarlo };
std::string to_string(BoundMethod method);

/// An exactly counted or estimated quantity paired with a closed-form upper bound.
/// Exact comparisons allow a relative margin of 1e-9 on the bound; Monte Carlo reports
/// pass when estimate + 3 std_error <= bound.
struct BoundReport {
    std::string quantity;
    BoundMethod method = BoundMethod::Enumeration;
    std::string exact;          ///< decimal value of an exact count, empty otherwise
    double estimate = 0.0;
    double std_error = 0.0;
    double bound = 0.0;
    bool pass = false;
    nlohmann::json parameters = nlohmann::json::object();
    std::string note;

    double upper() const { return method == BoundMethod::MonteCarlo ? estimate + 3.0 * std_error : estimate; }
};

nlohmann::json to_json(const BoundReport& report);

/// Relative slack granted to floating-point bounds when compared with exact integers.
inline constexpr double kBoundMargin = 1e-9;
/// Constant in the companion-index count bound.
inline constexpr double kJSetConstant = 512.0 * 2.718281828459045;

BigInt factorial(int n);
BigInt binomial(int n, int k);

/// lambda_n = n! / (sqrt(2 pi n) (n/e)^n); throws InvalidArgument for n < 1 or n > 10000 and
/// NumericalError if the value leaves (1, 1.1).
double stirling_factor(int n);

/// binom(q, p) against e^p q^p p^-p.
BoundReport binom_bound_check(int q, int p);

struct CompositionCount {
    int q = 0;
    int p = 0;
    BigInt enumerated;
    BigInt formula;  ///< binom(q - 1, p - 1)
    bool equal() const { return enumerated == formula; }
};

/// Enumerates p-tuples of positive integers summing to q (q <= 24).
CompositionCount count_compositions(int q, int p);

/// p! / (a_1! ... a_q!) with p = sum a.
BigInt multiplicity_count(std::span<const int> a);

/// Number of q-ary p-tuples whose multiplicity vector equals a, by enumeration (q^p <= 1e8).
BigInt multiplicity_count_enumerated(std::span<const int> a);

/// Sum of multiplicity_count over every multiplicity vector of length q summing to p.
BigInt multinomial_sum(int q, int p);

struct EffectiveSetReport {
    int q = 0;
    int p = 0;
    BigInt exact;
    /// the three successively coarser upper bounds, tightest first
    std::array<double, 3> bounds{};
    bool pass = false;  ///< exact <= bounds[0] <= bounds[1] <= bounds[2] (with margin)
};

/// Exhaustive count of p-tuples over {1..q} in which no value occurs exactly once.
/// Needs 1 <= p <= q and q^p <= 1e9.
EffectiveSetReport effective_set(int q, int p);

/// Same count from the sum over multiplicity signatures (no enumeration of tuples).
BigInt effective_set_by_signatures(int q, int p);

/// True if (m, n) is the singleton/repeated split of some multi-index of length 2k with m+n <= N.
bool valid_split(int N, int k, int m, int n);

struct JSetReport {
    int N = 0, k = 0, m = 0, n = 0;
    BigInt exact;
    double bound = 0.0;  ///< C^k N^(k - m/2) k^(k + m/2)
    bool pass = false;
};

/// |J_{m,n}|: 2k-tuples over {1..N} with b_l >= 1 for l <= m and b_l != 1 for l > m + n.
/// Requires m + n <= N and N^(2k) <= 1e8.
JSetReport j_set(int N, int k, int m, int n, double constant = kJSetConstant);

/// Multiplicities (b_1..b_N) of a multi-index with entries in 1..N.
std::vector<int> multiplicities(std::span<const int> index, int N);

/// m = number of values with multiplicity 1, n = number with multiplicity > 1.
std::pair<int, int> singleton_split(std::span<const int> index, int N);

/// True when the multiplicities of I are 0 < a_1 <= ... <= a_n followed by zeros.
bool is_reduced(std::span<const int> index, int N);

/// True when J belongs to J_{m,n}.
bool in_j_set(std::span<const int> j, int N, int m, int n);

/// Calls f(tuple) for every p-tuple over {1..q} in odometer order (last entry fastest).
template <class F> void for_each_tuple(int q, int p, F&& f)
{
    std::vector<int> t(static_cast<std::size_t>(p), 1);
    while (true) {
        f(std::span<const int>(t));
        int pos = p - 1;
        while (pos >= 0 && t[static_cast<std::size_t>(pos)] == q) t[static_cast<std::size_t>(pos--)] = 1;
        if (pos < 0) return;
        ++t[static_cast<std::size_t>(pos)];
    }
}

} // namespace chaoslab
