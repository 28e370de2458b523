// Export and import are a process boundary: everything a consumer needs to
// rebuild the distribution must survive the trip, bit for bit, in both
// formats, and corrupted artifacts must be rejected rather than trusted.

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "priq/errors.hpp"
#include "priq/fpi.hpp"
#include "priq/inversion.hpp"
#include "priq/io.hpp"
#include "priq/model.hpp"
#include "priq/pgf.hpp"

namespace {

namespace fs = std::filesystem;

// Fresh scratch directory per test run; contents are disposable.
fs::path scratch() {
    const auto dir = fs::temp_directory_path() / "priq_io_test";
    fs::create_directories(dir);
    return dir;
}

priq::JointPmf small_fpi_pmf() {
    const std::vector<double> loads{0.3, 0.2};
    const auto m = priq::ModelParams::from_loads(loads, 2, 1.0);
    return priq::run_fpi(m, 8);
}

priq::JointPmf small_fft_pmf() {
    const std::vector<double> loads{0.3, 0.2};
    const auto m = priq::ModelParams::from_loads(loads, 2, 1.0);
    return priq::invert_joint(priq::PgfEvaluator(m), priq::plan_scheme(m, 12), 12);
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("hash matches the published reference vectors") {
    priq::Fnv1a64 h;
    CHECK(h.value() == 0xcbf29ce484222325ull);
    h.update("a", 1);
    CHECK(h.value() == 0xaf63dc4c8601ec8cull);
    priq::Fnv1a64 h2;
    h2.update("foobar", 6);
    CHECK(h2.value() == 0x85944171f73967e8ull);
}

TEST_CASE("file hash agrees with the incremental hash") {
    const auto dir = scratch();
    const auto path = (dir / "blob.bin").string();
    const std::string payload = "priority queue artifact\n";
    std::ofstream(path, std::ios::binary).write(payload.data(),
                                                static_cast<std::streamsize>(payload.size()));
    priq::Fnv1a64 h;
    h.update(payload.data(), payload.size());
    CHECK(priq::fnv1a64_file(path) == h.value());
}

TEST_CASE("raw round-trip is bit-exact") {
    const auto p = small_fpi_pmf();
    const auto prefix = (scratch() / "fpi_raw").string();
    const auto meta = priq::export_pmf(p, prefix, priq::ArrayFormat::RawF64);
    const auto q = priq::import_pmf(meta);

    CHECK(q.kind == p.kind);
    CHECK(q.values.shape() == p.values.shape());
    CHECK(q.values.storage() == p.values.storage());
    CHECK(std::vector<double>(q.model.loads().begin(), q.model.loads().end()) ==
          std::vector<double>(p.model.loads().begin(), p.model.loads().end()));
    CHECK(q.model.servers() == p.model.servers());
    CHECK(q.model.mu() == p.model.mu());
    CHECK(q.generator.method == p.generator.method);
    CHECK(q.generator.iterations == p.generator.iterations);
    CHECK(q.generator.final_delta == p.generator.final_delta);
}

TEST_CASE("csv round-trip is bit-exact including scheme metadata") {
    const auto p = small_fft_pmf();
    const auto prefix = (scratch() / "fft_csv").string();
    const auto meta = priq::export_pmf(p, prefix, priq::ArrayFormat::Csv);
    const auto q = priq::import_pmf(meta);

    CHECK(q.values.storage() == p.values.storage());
    CHECK(q.generator.method == "fft");
    CHECK(q.generator.n_fft == p.generator.n_fft);
    CHECK(q.generator.alpha == p.generator.alpha);
    CHECK(q.generator.radii == p.generator.radii);
    CHECK(q.generator.weights == p.generator.weights);
    CHECK(q.generator.worst_negative == p.generator.worst_negative);
}

TEST_CASE("round-trip survives moving the artifact pair") {
    const auto p = small_fpi_pmf();
    const auto dir = scratch();
    const auto meta = priq::export_pmf(p, (dir / "movable").string(),
                                       priq::ArrayFormat::RawF64);
    const auto moved = dir / "moved";
    fs::create_directories(moved);
    fs::rename(meta, moved / "movable.json");
    fs::rename(dir / "movable.f64", moved / "movable.f64");
    const auto q = priq::import_pmf((moved / "movable.json").string());
    CHECK(q.values.storage() == p.values.storage());
}

TEST_CASE("export clamps round-off dust and rejects real negatives") {
    auto p = small_fpi_pmf();
    p.values.at({1, 1}) = -5e-13;
    const auto prefix = (scratch() / "dusty").string();
    const auto meta = priq::export_pmf(p, prefix, priq::ArrayFormat::RawF64);
    const auto q = priq::import_pmf(meta);
    CHECK(q.values.at({1, 1}) == 0.0);

    p.values.at({1, 1}) = -1e-9;
    CHECK_THROWS_AS(priq::export_pmf(p, (scratch() / "bad").string(),
                                     priq::ArrayFormat::RawF64),
                    priq::NumericError);
}

TEST_CASE("corrupted artifacts are rejected") {
    const auto p = small_fpi_pmf();
    const auto dir = scratch();

    const auto meta = priq::export_pmf(p, (dir / "tamper").string(),
                                       priq::ArrayFormat::RawF64);
    {
        std::fstream f(dir / "tamper.f64",
                       std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(16);
        const char flip = 0x7f;
        f.write(&flip, 1);
    }
    CHECK_THROWS_WITH_AS(priq::import_pmf(meta), doctest::Contains("checksum"),
                         priq::ValidationError);

    const auto meta2 = priq::export_pmf(p, (dir / "short").string(),
                                        priq::ArrayFormat::RawF64);
    fs::resize_file(dir / "short.f64", 64);
    CHECK_THROWS_AS(priq::import_pmf(meta2), priq::ValidationError);

    const auto garbled = (dir / "garbled.json").string();
    std::ofstream(garbled) << "{ not json";
    CHECK_THROWS_AS(priq::import_pmf(garbled), priq::ValidationError);

    CHECK_THROWS_AS(priq::import_pmf((dir / "missing.json").string()),
                    priq::ValidationError);
}

}  // TEST_SUITE
