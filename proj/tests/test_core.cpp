#include "doctest.h"

#include "medusa/core.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

using namespace medusa;

namespace {

DataPartition part(std::string id, std::uint64_t size, CloudId home, std::uint64_t seed) {
    return DataPartition{std::move(id), size, home, seed};
}

JobSpec vanilla_job(std::string id, std::vector<std::string> inputs) {
    JobSpec job;
    job.id = std::move(id);
    job.phase = JobPhase::Vanilla;
    job.input_ids = std::move(inputs);
    job.map_tasks = 4;
    job.reduce_tasks = 1;
    return job;
}

}  // namespace

TEST_CASE("sha256 matches published test vectors") {
    // FIPS 180-2 examples, so the wrapper is checked against an external oracle.
    CHECK(sha256(std::string{}).hex()
          == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256(std::string{"abc"}).hex()
          == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256(std::string{"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"}).hex()
          == "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("digest hex round trip and ordering") {
    Digest d = sha256(std::string{"abc"});
    auto back = Digest::from_hex(d.hex());
    REQUIRE(back.has_value());
    CHECK(*back == d);

    CHECK_FALSE(Digest::from_hex("zz").has_value());
    CHECK_FALSE(Digest::from_hex(d.hex() + "00").has_value());

    Digest a = sha256(std::string{"a"});
    Digest b = sha256(std::string{"b"});
    CHECK(a != b);
    CHECK(((a < b) || (b < a)));
}

TEST_CASE("canonical digest is deterministic") {
    std::vector<DataPartition> inputs{part("p0", 100, 0, 7), part("p1", 200, 1, 8)};
    JobSpec job = vanilla_job("v:p0", {"p0", "p1"});
    CHECK(canonical_digest(inputs, job) == canonical_digest(inputs, job));
}

TEST_CASE("canonical digest distinguishes content seeds and jobs") {
    JobSpec job = vanilla_job("v:p0", {"p0"});
    Digest with_seed_1 = canonical_digest({part("p0", 100, 0, 1)}, job);
    Digest with_seed_2 = canonical_digest({part("p0", 100, 0, 2)}, job);
    CHECK(with_seed_1 != with_seed_2);

    JobSpec other = vanilla_job("v:p1", {"p0"});
    CHECK(canonical_digest({part("p0", 100, 0, 1)}, job)
          != canonical_digest({part("p0", 100, 0, 1)}, other));
}

TEST_CASE("canonical digest ignores input order") {
    JobSpec job = vanilla_job("global", {"p0", "p1", "p2"});
    std::vector<DataPartition> inputs{part("p0", 10, 0, 1), part("p1", 20, 1, 2),
                                      part("p2", 30, 2, 3)};

    // Oracle: sort-before-hash means the sorted order is the canonical one.
    std::vector<DataPartition> sorted = inputs;
    std::sort(sorted.begin(), sorted.end(),
              [](const DataPartition& a, const DataPartition& b) { return a.id < b.id; });
    Digest expected = canonical_digest(sorted, job);

    std::vector<DataPartition> shuffled = inputs;
    std::mt19937_64 rng(42);
    for (int round = 0; round < 10; ++round) {
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(canonical_digest(shuffled, job) == expected);
    }
}

TEST_CASE("canonical digest rejects an empty input set") {
    JobSpec job = vanilla_job("v:p0", {});
    CHECK_THROWS_AS(canonical_digest({}, job), std::invalid_argument);
}
