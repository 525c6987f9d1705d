#include "chaoslab/biot_savart.hpp"

#include "chaoslab/error.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

namespace chaoslab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr char kMagic[4] = {'C', 'L', 'B', 'S'};

} // namespace

PeriodicBiotSavart::PeriodicBiotSavart(double split_width) : width_(split_width)
{
    if (!(split_width > 0.02 && split_width < 0.3)) {
        throw InvalidArgument("PeriodicBiotSavart: split width must lie in (0.02, 0.3)");
    }
    // exp(-d^2 / 2 s^2) < 1e-18 for images at distance >= image_range - 1/2
    image_range_ = static_cast<int>(std::ceil(width_ * std::sqrt(2.0 * 41.5) + 0.5));
    // exp(-2 pi^2 s^2 k^2) < 1e-18
    kmax_ = static_cast<int>(std::ceil(std::sqrt(41.5 / (2.0 * kPi * kPi * width_ * width_))));
    const int side = 2 * kmax_ + 1;
    coef_.assign(static_cast<std::size_t>((kmax_ + 1) * side), 0.0);
    for (int k1 = 0; k1 <= kmax_; ++k1) {
        for (int k2 = -kmax_; k2 <= kmax_; ++k2) {
            if (k1 == 0 && k2 <= 0) continue;
            const double k2sum = static_cast<double>(k1 * k1 + k2 * k2);
            // both k and -k contribute the same sine term, hence the factor 2
            coef_[static_cast<std::size_t>(k1 * side + k2 + kmax_)] =
                2.0 * std::exp(-2.0 * kPi * kPi * width_ * width_ * k2sum) / k2sum;
        }
    }
}

Vec PeriodicBiotSavart::remainder(const double* r) const
{
    const double s2 = 2.0 * width_ * width_;
    Vec out{0.0, 0.0};

    // central cell: r_perp/|r|^2 * (exp(-|r|^2/2s^2) - 1), smooth with value 0 at r = 0
    const double rr = r[0] * r[0] + r[1] * r[1];
    if (rr > 0.0) {
        const double f = std::expm1(-rr / s2) / rr;
        out[0] += -r[1] * f;
        out[1] += r[0] * f;
    }
    // screened periodic images
    for (int a = -image_range_; a <= image_range_; ++a) {
        for (int b = -image_range_; b <= image_range_; ++b) {
            if (a == 0 && b == 0) continue;
            const double x = r[0] + a;
            const double y = r[1] + b;
            const double q = x * x + y * y;
            const double f = std::exp(-q / s2) / q;
            out[0] += -y * f;
            out[1] += x * f;
        }
    }
    // long-range part: sum_k g(k)/|k|^2 (-k2, k1) sin(2 pi k.r)
    const int side = 2 * kmax_ + 1;
    const std::complex<double> e1 = std::polar(1.0, 2.0 * kPi * r[0]);
    const std::complex<double> e2 = std::polar(1.0, 2.0 * kPi * r[1]);
    std::vector<std::complex<double>> p2(static_cast<std::size_t>(side));
    {
        std::complex<double> up = 1.0;
        const std::complex<double> e2c = std::conj(e2);
        std::complex<double> down = 1.0;
        p2[static_cast<std::size_t>(kmax_)] = 1.0;
        for (int k = 1; k <= kmax_; ++k) {
            up *= e2;
            down *= e2c;
            p2[static_cast<std::size_t>(kmax_ + k)] = up;
            p2[static_cast<std::size_t>(kmax_ - k)] = down;
        }
    }
    std::complex<double> p1 = 1.0;
    for (int k1 = 0; k1 <= kmax_; ++k1) {
        for (int k2 = -kmax_; k2 <= kmax_; ++k2) {
            const double c = coef_[static_cast<std::size_t>(k1 * side + k2 + kmax_)];
            if (c == 0.0) continue;
            const double s = (p1 * p2[static_cast<std::size_t>(k2 + kmax_)]).imag();
            out[0] += -k2 * c * s;
            out[1] += k1 * c * s;
        }
        p1 *= e1;
    }
    return out;
}

Vec PeriodicBiotSavart::velocity(const double* r) const
{
    const double rr = r[0] * r[0] + r[1] * r[1];
    if (rr == 0.0) return {0.0, 0.0};
    Vec v = remainder(r);
    v[0] += -r[1] / rr;
    v[1] += r[0] / rr;
    return v;
}

BiotSavartTable BiotSavartTable::build(double alpha, int n, double split_width)
{
    if (n < 32 || (n & (n - 1)) != 0) throw InvalidArgument("BiotSavartTable: grid size must be a power of two >= 32");
    const PeriodicBiotSavart exact(split_width);
    BiotSavartTable t;
    t.n_ = n;
    t.alpha_ = alpha;
    t.split_width_ = split_width;
    const std::size_t stride = static_cast<std::size_t>(n + 1);
    t.data_.assign(2 * stride * stride, 0.0);
    // node (i, j) sits at r = (i/n - 1/2, j/n - 1/2); node (n-i, n-j) is its mirror -r
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(j);
            const std::size_t mirror = static_cast<std::size_t>(n - i) * stride + static_cast<std::size_t>(n - j);
            if (mirror < idx) {
                t.data_[2 * idx] = -t.data_[2 * mirror];
                t.data_[2 * idx + 1] = -t.data_[2 * mirror + 1];
                continue;
            }
            const double r[2] = {static_cast<double>(i) / n - 0.5, static_cast<double>(j) / n - 0.5};
            const Vec v = mirror == idx ? Vec{0.0, 0.0} : exact.remainder(r);
            t.data_[2 * idx] = alpha * v[0];
            t.data_[2 * idx + 1] = alpha * v[1];
        }
    }
    return t;
}

std::string BiotSavartTable::cache_file_name(double alpha, int n)
{
    std::ostringstream os;
    os << "biot_savart_v" << kFormatVersion << "_n" << n << "_alpha" << std::hexfloat << alpha << ".bin";
    std::string s = os.str();
    for (auto& ch : s)
        if (ch == '+') ch = 'p';
    return s;
}

void BiotSavartTable::save(const std::filesystem::path& file) const
{
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("BiotSavartTable: cannot write " + file.string());
    const std::uint32_t version = kFormatVersion;
    const std::uint32_t n = static_cast<std::uint32_t>(n_);
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&alpha_), sizeof alpha_);
    out.write(reinterpret_cast<const char*>(&split_width_), sizeof split_width_);
    out.write(reinterpret_cast<const char*>(data_.data()), static_cast<std::streamsize>(data_.size() * sizeof(double)));
}

std::optional<BiotSavartTable> BiotSavartTable::load(const std::filesystem::path& file, double alpha, int n)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[4];
    std::uint32_t version = 0, stored_n = 0;
    BiotSavartTable t;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&stored_n), sizeof stored_n);
    in.read(reinterpret_cast<char*>(&t.alpha_), sizeof t.alpha_);
    in.read(reinterpret_cast<char*>(&t.split_width_), sizeof t.split_width_);
    if (!in || std::memcmp(magic, kMagic, 4) != 0 || version != kFormatVersion ||
        stored_n != static_cast<std::uint32_t>(n) || t.alpha_ != alpha) {
        return std::nullopt;
    }
    t.n_ = n;
    const std::size_t stride = static_cast<std::size_t>(n + 1);
    t.data_.resize(2 * stride * stride);
    in.read(reinterpret_cast<char*>(t.data_.data()), static_cast<std::streamsize>(t.data_.size() * sizeof(double)));
    if (!in) return std::nullopt;
    return t;
}

BiotSavartTable BiotSavartTable::cached(double alpha, int n, const std::optional<std::filesystem::path>& dir)
{
    if (!dir) return build(alpha, n);
    const auto file = *dir / cache_file_name(alpha, n);
    if (auto t = load(file, alpha, n)) return std::move(*t);
    auto t = build(alpha, n);
    std::error_code ec;
    std::filesystem::create_directories(*dir, ec);
    if (!ec) {
        // write-then-rename so concurrent readers never see a partial file
        const auto tmp = file.string() + ".tmp" + std::to_string(reinterpret_cast<std::uintptr_t>(&t));
        t.save(tmp);
        std::filesystem::rename(tmp, file, ec);
    }
    return t;
}

} // namespace chaoslab
