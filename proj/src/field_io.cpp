#include "chaoslab/field_io.hpp"

#include "chaoslab/error.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace chaoslab {

namespace {

constexpr std::array<char, 4> kMagic = {'C', 'L', 'G', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T> void put(std::ostream& os, T v) { os.write(reinterpret_cast<const char*>(&v), sizeof(T)); }

template <class T> T get(std::istream& is)
{
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw Error("read_field_binary: truncated header");
    return v;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out)
{
    std::ofstream os(path, mode | std::ios::trunc);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << std::setprecision(17);
    return os;
}

} // namespace

void write_field_binary(const std::filesystem::path& path, const GridField& field)
{
    auto os = open_out(path, std::ios::binary);
    os.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(os, kVersion);
    put<std::int32_t>(os, field.n);
    put<std::int32_t>(os, field.dim);
    put<std::int32_t>(os, field.components);
    put<std::int32_t>(os, static_cast<std::int32_t>(field.kind));
    put<double>(os, field.time);
    os.write(reinterpret_cast<const char*>(field.values.data()),
             static_cast<std::streamsize>(field.values.size() * sizeof(double)));
    if (!os) throw Error("write_field_binary: write failed for " + path.string());
}

GridField read_field_binary(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kMagic) throw Error("read_field_binary: bad magic in " + path.string());
    if (get<std::uint32_t>(is) != kVersion) throw Error("read_field_binary: unsupported version");
    const int n = get<std::int32_t>(is);
    const int dim = get<std::int32_t>(is);
    const int comps = get<std::int32_t>(is);
    const int kind = get<std::int32_t>(is);
    if (kind < 0 || kind > static_cast<int>(FieldKind::Vector)) throw Error("read_field_binary: bad kind");
    GridField f(n, dim, static_cast<FieldKind>(kind), comps);
    f.time = get<double>(is);
    is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!is) throw Error("read_field_binary: truncated data in " + path.string());
    return f;
}

void write_field_csv(const std::filesystem::path& path, const GridField& field)
{
    auto os = open_out(path);
    for (int j = 0; j < field.dim; ++j) os << (j ? "," : "") << 'x' << j + 1;
    for (int c = 0; c < field.components; ++c) os << ",v" << c + 1;
    os << '\n';
    double x[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < field.size(); ++i) {
        field.node_coords(i, x);
        for (int j = 0; j < field.dim; ++j) os << (j ? "," : "") << x[j];
        for (int c = 0; c < field.components; ++c) os << ',' << field.component(c)[i];
        os << '\n';
    }
}

void write_snapshot_csv(const std::filesystem::path& path, const Ensemble& ens, std::size_t t)
{
    if (t >= ens.snapshots.size()) throw InvalidArgument("write_snapshot_csv: time index out of range");
    auto os = open_out(path);
    const auto& row = ens.snapshots[t];
    const int d = row.empty() ? 1 : row.front().dim;
    os << "realization,particle";
    for (int j = 0; j < d; ++j) os << ",x" << j + 1;
    os << '\n';
    for (std::size_t m = 0; m < row.size(); ++m) {
        for (int i = 0; i < row[m].count; ++i) {
            os << m << ',' << i;
            for (int j = 0; j < d; ++j) os << ',' << row[m].position(i)[j];
            os << '\n';
        }
    }
}

} // namespace chaoslab
