#include "chaoslab/combinatorics.hpp"

#include "chaoslab/error.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>

namespace chaoslab {

namespace {

using Real = boost::multiprecision::cpp_bin_float_50;

const Real& e_real()
{
    static const Real e = boost::multiprecision::exp(Real(1));
    return e;
}

Real to_real(const BigInt& v) { return Real(v); }

bool exact_within(const BigInt& exact, const Real& bound)
{
    return to_real(exact) <= bound * (1 + Real(kBoundMargin));
}

bool within(const Real& lo, const Real& hi) { return lo <= hi * (1 + Real(kBoundMargin)); }

double pow_checked(double q, int p)
{
    return std::pow(q, static_cast<double>(p));
}

void count_compositions_rec(int remaining, int parts, BigInt& count)
{
    if (parts == 1) {
        if (remaining >= 1) ++count;
        return;
    }
    for (int b = 1; b <= remaining - (parts - 1); ++b) count_compositions_rec(remaining - b, parts - 1, count);
}

/// visits every vector a of length q with entries >= 0 and sum p
template <class F> void for_each_signature(int q, int p, std::vector<int>& a, int pos, int left, F& f)
{
    if (pos == q - 1) {
        a[static_cast<std::size_t>(pos)] = left;
        f(a);
        return;
    }
    for (int v = 0; v <= left; ++v) {
        a[static_cast<std::size_t>(pos)] = v;
        for_each_signature(q, p, a, pos + 1, left - v, f);
    }
}

} // namespace

std::string to_string(BoundMethod m)
{
    switch (m) {
    case BoundMethod::Enumeration: return "enumeration";
    case BoundMethod::ClosedForm: return "closed-form";
    case BoundMethod::Quadrature: return "quadrature";
    case BoundMethod::MonteCarlo: return "monte-carlo";
    }
    return "unknown";
}

nlohmann::json to_json(const BoundReport& r)
{
    nlohmann::json j;
    j["quantity"] = r.quantity;
    j["method"] = to_string(r.method);
    if (!r.exact.empty()) j["exact"] = r.exact;
    j["estimate"] = r.estimate;
    if (r.method == BoundMethod::MonteCarlo) j["std_error"] = r.std_error;
    j["bound"] = r.bound;
    j["verdict"] = r.pass ? "pass" : "fail";
    j["parameters"] = r.parameters;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

BigInt factorial(int n)
{
    if (n < 0) throw InvalidArgument("factorial: negative argument");
    BigInt r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

BigInt binomial(int n, int k)
{
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    BigInt r = 1;
    for (int i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

double stirling_factor(int n)
{
    if (n < 1) throw InvalidArgument("stirling_factor: n must be >= 1");
    if (n > 10000) throw InvalidArgument("stirling_factor: n beyond the big-integer budget (10000)");
    using boost::multiprecision::pow;
    using boost::multiprecision::sqrt;
    const Real pi = boost::math::constants::pi<Real>();
    const Real nn(n);
    const Real lambda = to_real(factorial(n)) / (sqrt(2 * pi * nn) * pow(nn / e_real(), n));
    const double v = lambda.convert_to<double>();
    if (!(v > 1.0 && v < 1.1)) throw NumericalError("stirling_factor: lambda_n outside (1, 1.1)");
    return v;
}

BoundReport binom_bound_check(int q, int p)
{
    if (p < 1 || p > q) throw InvalidArgument("binom_bound_check: need 1 <= p <= q");
    using boost::multiprecision::pow;
    const BigInt exact = binomial(q, p);
    const Real bound = pow(e_real(), p) * pow(Real(q), p) / pow(Real(p), p);
    BoundReport r;
    r.quantity = "binomial";
    r.method = BoundMethod::Enumeration;
    r.exact = exact.str();
    r.estimate = exact.convert_to<double>();
    r.bound = bound.convert_to<double>();
    r.pass = exact_within(exact, bound);
    r.parameters = {{"q", q}, {"p", p}};
    return r;
}

CompositionCount count_compositions(int q, int p)
{
    if (p < 1 || p > q) throw InvalidArgument("count_compositions: need 1 <= p <= q");
    if (q > 24) throw InvalidArgument("count_compositions: enumeration limited to q <= 24");
    CompositionCount c;
    c.q = q;
    c.p = p;
    count_compositions_rec(q, p, c.enumerated);
    c.formula = binomial(q - 1, p - 1);
    return c;
}

BigInt multiplicity_count(std::span<const int> a)
{
    int p = 0;
    for (int v : a) {
        if (v < 0) throw InvalidArgument("multiplicity_count: negative multiplicity");
        p += v;
    }
    BigInt r = factorial(p);
    for (int v : a) r /= factorial(v);
    return r;
}

BigInt multiplicity_count_enumerated(std::span<const int> a)
{
    const int q = static_cast<int>(a.size());
    int p = 0;
    for (int v : a) p += v;
    if (q < 1) throw InvalidArgument("multiplicity_count_enumerated: empty signature");
    if (p == 0) return 1;
    if (pow_checked(q, p) > 1e8) throw InvalidArgument("multiplicity_count_enumerated: q^p exceeds 1e8");
    BigInt count = 0;
    std::vector<int> b(static_cast<std::size_t>(q));
    for_each_tuple(q, p, [&](std::span<const int> t) {
        std::fill(b.begin(), b.end(), 0);
        for (int v : t) ++b[static_cast<std::size_t>(v - 1)];
        if (std::equal(b.begin(), b.end(), a.begin())) ++count;
    });
    return count;
}

BigInt multinomial_sum(int q, int p)
{
    if (q < 1 || p < 0) throw InvalidArgument("multinomial_sum: need q >= 1, p >= 0");
    BigInt total = 0;
    std::vector<int> a(static_cast<std::size_t>(q));
    auto add = [&](const std::vector<int>& v) { total += multiplicity_count(v); };
    for_each_signature(q, p, a, 0, p, add);
    return total;
}

EffectiveSetReport effective_set(int q, int p)
{
    if (p < 1 || p > q) throw InvalidArgument("effective_set: need 1 <= p <= q");
    if (pow_checked(q, p) > 1e9) throw InvalidArgument("effective_set: q^p exceeds the enumeration limit 1e9");
    EffectiveSetReport r;
    r.q = q;
    r.p = p;

    // odometer with running multiplicities and a running count of values seen exactly once
    std::vector<int> t(static_cast<std::size_t>(p), 0);
    std::vector<int> mult(static_cast<std::size_t>(q), 0);
    mult[0] = p;
    int singles = p == 1 ? 1 : 0;
    auto bump = [&](int v, int delta) {
        int& c = mult[static_cast<std::size_t>(v)];
        if (c == 1) --singles;
        c += delta;
        if (c == 1) ++singles;
    };
    std::uint64_t count = 0;
    while (true) {
        if (singles == 0) ++count;
        int pos = p - 1;
        while (pos >= 0 && t[static_cast<std::size_t>(pos)] == q - 1) {
            bump(q - 1, -1);
            bump(0, +1);
            t[static_cast<std::size_t>(pos--)] = 0;
        }
        if (pos < 0) break;
        const int v = t[static_cast<std::size_t>(pos)];
        bump(v, -1);
        bump(v + 1, +1);
        t[static_cast<std::size_t>(pos)] = v + 1;
    }
    r.exact = count;

    using boost::multiprecision::pow;
    const int h = p / 2;
    Real b1 = 0;
    for (int l = 1; l <= h; ++l) b1 += to_real(binomial(q, l)) * pow(Real(l), p);
    const Real b2 = Real(h) * to_real(binomial(q, h)) * pow(Real(h), p);
    const Real half = Real(p) / 2;
    const Real b3 = half * pow(e_real(), half) * pow(Real(q), half) * pow(half, half);
    r.bounds = {b1.convert_to<double>(), b2.convert_to<double>(), b3.convert_to<double>()};
    r.pass = exact_within(r.exact, b1) && within(b1, b2) && within(b2, b3);
    return r;
}

BigInt effective_set_by_signatures(int q, int p)
{
    if (q < 1 || p < 1) throw InvalidArgument("effective_set_by_signatures: need q, p >= 1");
    BigInt total = 0;
    std::vector<int> a(static_cast<std::size_t>(q));
    auto add = [&](const std::vector<int>& v) {
        if (std::find(v.begin(), v.end(), 1) == v.end()) total += multiplicity_count(v);
    };
    for_each_signature(q, p, a, 0, p, add);
    return total;
}

bool valid_split(int N, int k, int m, int n)
{
    if (m < 0 || n < 0 || m + n > N) return false;
    if (n == 0) return m == 2 * k;
    return m + 2 * n <= 2 * k;
}

JSetReport j_set(int N, int k, int m, int n, double constant)
{
    if (N < 1 || k < 1) throw InvalidArgument("j_set: need N, k >= 1");
    if (m < 0 || n < 0 || m + n > N) throw InvalidArgument("j_set: need m, n >= 0 and m + n <= N");
    if (pow_checked(N, 2 * k) > 1e8) throw InvalidArgument("j_set: N^(2k) exceeds 1e8");
    JSetReport r{N, k, m, n, 0, 0.0, false};
    if (m <= 2 * k) {
        std::vector<int> b(static_cast<std::size_t>(N));
        std::uint64_t count = 0;
        for_each_tuple(N, 2 * k, [&](std::span<const int> t) {
            std::fill(b.begin(), b.end(), 0);
            for (int v : t) ++b[static_cast<std::size_t>(v - 1)];
            for (int l = 0; l < m; ++l)
                if (b[static_cast<std::size_t>(l)] < 1) return;
            for (int l = m + n; l < N; ++l)
                if (b[static_cast<std::size_t>(l)] == 1) return;
            ++count;
        });
        r.exact = count;
    }
    using boost::multiprecision::pow;
    const Real bound = pow(Real(constant), k) * pow(Real(N), Real(k) - Real(m) / 2) * pow(Real(k), Real(k) + Real(m) / 2);
    r.bound = bound.convert_to<double>();
    r.pass = exact_within(r.exact, bound);
    return r;
}

std::vector<int> multiplicities(std::span<const int> index, int N)
{
    std::vector<int> b(static_cast<std::size_t>(N), 0);
    for (int v : index) {
        if (v < 1 || v > N) throw InvalidArgument("multiplicities: index entry out of range");
        ++b[static_cast<std::size_t>(v - 1)];
    }
    return b;
}

std::pair<int, int> singleton_split(std::span<const int> index, int N)
{
    int m = 0, n = 0;
    for (int c : multiplicities(index, N)) {
        if (c == 1) ++m;
        else if (c > 1) ++n;
    }
    return {m, n};
}

bool is_reduced(std::span<const int> index, int N)
{
    const auto a = multiplicities(index, N);
    std::size_t l = 0;
    while (l < a.size() && a[l] > 0) {
        if (l > 0 && a[l] < a[l - 1]) return false;
        ++l;
    }
    for (; l < a.size(); ++l)
        if (a[l] != 0) return false;
    return true;
}

bool in_j_set(std::span<const int> j, int N, int m, int n)
{
    const auto b = multiplicities(j, N);
    for (int l = 0; l < m && l < N; ++l)
        if (b[static_cast<std::size_t>(l)] < 1) return false;
    for (int l = m + n; l < N; ++l)
        if (b[static_cast<std::size_t>(l)] == 1) return false;
    return true;
}

} // namespace chaoslab
