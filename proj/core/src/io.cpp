#include "priq/io.hpp"

#include <bit>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "json.hpp"

// The raw format is defined as little-endian float64; writing memory
// verbatim is only correct on a matching host.
static_assert(std::endian::native == std::endian::little,
              "raw float64 export assumes a little-endian host");

namespace priq {
namespace {

using nlohmann::json;

constexpr double kExportClampFloor = -1e-12;
constexpr std::size_t kChunkDoubles = 1u << 20;

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

const char* kind_name(PmfKind k) {
    return k == PmfKind::WaitConditional ? "wait_conditional" : "full";
}

PmfKind kind_from(const std::string& s) {
    if (s == "wait_conditional") return PmfKind::WaitConditional;
    if (s == "full") return PmfKind::Full;
    throw ValidationError("BadMetadata", "unknown distribution kind: " + s);
}

// Clamp rule for leaving the process boundary: round-off dust becomes an
// exact zero, anything larger in magnitude is a defect worth failing on.
double clamped(double x) {
    if (x >= 0.0) return x;
    if (x >= kExportClampFloor) return 0.0;
    throw NumericError("NegativeProbability",
                       "array holds a negative entry beyond round-off tolerance");
}

void write_raw(const double* values, std::size_t count, std::ofstream& out,
               Fnv1a64& hash) {
    std::vector<double> buf(std::min(count, kChunkDoubles));
    std::size_t done = 0;
    while (done < count) {
        const std::size_t n = std::min(kChunkDoubles, count - done);
        for (std::size_t i = 0; i < n; ++i) buf[i] = clamped(values[done + i]);
        hash.update(buf.data(), n * sizeof(double));
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(n * sizeof(double)));
        done += n;
    }
}

void write_csv(const double* values, std::size_t count, std::size_t row_len,
               std::ofstream& out, Fnv1a64& hash) {
    std::string line;
    char buf[32];
    for (std::size_t i = 0; i < count; i += row_len) {
        line.clear();
        for (std::size_t j = 0; j < row_len; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", clamped(values[i + j]));
            line += buf;
            line += j + 1 < row_len ? ',' : '\n';
        }
        hash.update(line.data(), line.size());
        out.write(line.data(), static_cast<std::streamsize>(line.size()));
    }
}

void read_raw(std::ifstream& in, double* values, std::size_t count, Fnv1a64& hash) {
    std::size_t done = 0;
    std::vector<char> buf(kChunkDoubles * sizeof(double));
    while (done < count) {
        const std::size_t want = std::min(kChunkDoubles, count - done) * sizeof(double);
        in.read(buf.data(), static_cast<std::streamsize>(want));
        if (static_cast<std::size_t>(in.gcount()) != want)
            throw ValidationError("CountMismatch", "data file ends before the declared count");
        hash.update(buf.data(), want);
        std::memcpy(values + done, buf.data(), want);
        done += want / sizeof(double);
    }
    char extra;
    if (in.read(&extra, 1), in.gcount() != 0)
        throw ValidationError("CountMismatch", "data file is longer than the declared count");
}

void read_csv(std::ifstream& in, double* values, std::size_t count, Fnv1a64& hash) {
    std::vector<char> buf(1u << 20);
    std::string token;
    std::size_t filled = 0;
    const auto flush_token = [&] {
        if (token.empty()) return;
        if (filled >= count)
            throw ValidationError("CountMismatch",
                                  "data file is longer than the declared count");
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size())
            throw ValidationError("BadData", "unparseable entry: " + token);
        values[filled++] = v;
        token.clear();
    };
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const auto got = static_cast<std::size_t>(in.gcount());
        if (got == 0) break;
        hash.update(buf.data(), got);
        for (std::size_t i = 0; i < got; ++i) {
            const char c = buf[i];
            if (c == ',' || c == '\n' || c == '\r')
                flush_token();
            else
                token += c;
        }
    }
    flush_token();
    if (filled != count)
        throw ValidationError("CountMismatch", "data file ends before the declared count");
}

}  // namespace

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("OpenFailed", "cannot open " + path);
    Fnv1a64 hash;
    std::vector<char> buf(1u << 20);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        hash.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return hash.value();
}

std::string export_pmf(const JointPmf& p, const std::string& prefix, ArrayFormat format) {
    const std::string data_ext = format == ArrayFormat::Csv ? ".csv" : ".f64";
    const std::filesystem::path data_path = prefix + data_ext;
    const std::string meta_path = prefix + ".json";

    Fnv1a64 hash;
    {
        std::ofstream out(data_path, std::ios::binary);
        if (!out) throw ResourceError("WriteFailed", "cannot create " + data_path.string());
        if (format == ArrayFormat::Csv)
            write_csv(p.values.data(), p.values.size(), p.values.shape().back(), out, hash);
        else
            write_raw(p.values.data(), p.values.size(), out, hash);
        out.flush();
        if (!out) throw ResourceError("WriteFailed", "short write to " + data_path.string());
    }

    json meta{
        {"type", "joint_pmf"},
        {"version", 1},
        {"kind", kind_name(p.kind)},
        {"shape", p.values.shape()},
        {"axis_order", "axis 0 is the highest priority level; row-major, last axis fastest"},
        {"model",
         {{"loads", std::vector<double>(p.model.loads().begin(), p.model.loads().end())},
          {"servers", p.model.servers()},
          {"mu", p.model.mu()}}},
        {"generator",
         {{"method", p.generator.method},
          {"iterations", p.generator.iterations},
          {"final_delta", p.generator.final_delta},
          {"n_fft", p.generator.n_fft},
          {"alpha", p.generator.alpha},
          {"spread", p.generator.spread},
          {"radii", p.generator.radii},
          {"weights", p.generator.weights},
          {"worst_negative", p.generator.worst_negative}}},
        {"data",
         {{"file", data_path.filename().string()},
          {"format", format == ArrayFormat::Csv ? "csv" : "f64le"},
          {"count", p.values.size()},
          {"checksum_fnv1a64", hex64(hash.value())}}},
    };
    std::ofstream out(meta_path);
    if (!out) throw ResourceError("WriteFailed", "cannot create " + meta_path);
    out << meta.dump(2) << '\n';
    if (!out) throw ResourceError("WriteFailed", "short write to " + meta_path);
    return meta_path;
}

JointPmf import_pmf(const std::string& meta_path) {
    std::ifstream meta_in(meta_path);
    if (!meta_in) throw ValidationError("OpenFailed", "cannot open " + meta_path);
    json meta;
    std::string kind_str, data_file, format, checksum;
    std::vector<std::size_t> shape;
    std::vector<double> loads;
    int servers = 0;
    double mu = 0.0;
    std::size_t count = 0;
    GeneratorInfo gen;
    try {
        meta = json::parse(meta_in);
        if (meta.at("type") != "joint_pmf")
            throw ValidationError("BadMetadata", "not a joint_pmf artifact");
        kind_str = meta.at("kind").get<std::string>();
        shape = meta.at("shape").get<std::vector<std::size_t>>();
        const auto& jm = meta.at("model");
        loads = jm.at("loads").get<std::vector<double>>();
        servers = jm.at("servers").get<int>();
        mu = jm.at("mu").get<double>();
        const auto& jg = meta.at("generator");
        gen.method = jg.at("method").get<std::string>();
        gen.iterations = jg.at("iterations").get<std::uint64_t>();
        gen.final_delta = jg.at("final_delta").get<double>();
        gen.n_fft = jg.at("n_fft").get<int>();
        gen.alpha = jg.at("alpha").get<double>();
        gen.spread = jg.at("spread").get<double>();
        gen.radii = jg.at("radii").get<std::vector<double>>();
        gen.weights = jg.at("weights").get<std::vector<double>>();
        gen.worst_negative = jg.at("worst_negative").get<double>();
        const auto& jd = meta.at("data");
        data_file = jd.at("file").get<std::string>();
        format = jd.at("format").get<std::string>();
        count = jd.at("count").get<std::size_t>();
        checksum = jd.at("checksum_fnv1a64").get<std::string>();
    } catch (const json::exception& e) {
        throw ValidationError("BadMetadata", e.what());
    }

    NdArray<double> values(shape);
    if (values.size() != count)
        throw ValidationError("BadMetadata", "shape and count disagree");

    const auto data_path = std::filesystem::path(meta_path).parent_path() / data_file;
    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw ValidationError("OpenFailed", "cannot open " + data_path.string());
    Fnv1a64 hash;
    if (format == "f64le")
        read_raw(in, values.data(), count, hash);
    else if (format == "csv")
        read_csv(in, values.data(), count, hash);
    else
        throw ValidationError("BadMetadata", "unknown data format: " + format);
    if (hex64(hash.value()) != checksum)
        throw ValidationError("ChecksumMismatch",
                              "data file does not match its recorded checksum");

    return JointPmf{kind_from(kind_str),
                    ModelParams::from_loads(loads, servers, mu), std::move(values), gen};
}

}  // namespace priq
