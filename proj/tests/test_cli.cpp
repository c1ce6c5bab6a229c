#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = FSKG_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "fskg_cli_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& sub) const { return (path / sub).string(); }
};

std::string data_flags(const TempDir& dir) {
    return " --triples " + dir.str("data/triples.tsv") +
           " --emb-structural " + dir.str("data/emb_structural.tsv") +
           " --emb-textual " + dir.str("data/emb_textual.tsv") +
           " --emb-visual " + dir.str("data/emb_visual.tsv") +
           " --splits " + dir.str("data/splits.tsv");
}

void make_data(const TempDir& dir) {
    REQUIRE(run("synth --out " + dir.str("data") +
                " --n-entities 60 --n-relations 10 --triples-per-relation 12"
                " --d-s 6 --d-t 5 --d-v 4") == 0);
}

const std::string kQuickTrain =
    " --max-epochs 20 --eval-every 10 --batch-size 24 -K 3 --adapter-neurons 3"
    " --eval-n-query 4 --max-adapt-steps 5";

} // namespace

TEST_CASE("synth reruns are byte-identical") {
    TempDir dir;
    REQUIRE(run("synth --out " + dir.str("a") + " --n-entities 40 --n-relations 10"
                " --triples-per-relation 10") == 0);
    REQUIRE(run("synth --out " + dir.str("b") + " --n-entities 40 --n-relations 10"
                " --triples-per-relation 10") == 0);
    for (const char* f : {"triples.tsv", "emb_structural.tsv", "emb_textual.tsv",
                          "emb_visual.tsv", "splits.tsv", "config.json"}) {
        CHECK(slurp(dir.path / "a" / f) == slurp(dir.path / "b" / f));
    }
}

TEST_CASE("train then test produce deterministic artifacts") {
    TempDir dir;
    make_data(dir);

    REQUIRE(run("train --out " + dir.str("run1") + data_flags(dir) + kQuickTrain) == 0);
    REQUIRE(run("train --out " + dir.str("run2") + data_flags(dir) + kQuickTrain) == 0);
    CHECK(slurp(dir.path / "run1/history.csv") == slurp(dir.path / "run2/history.csv"));
    CHECK(slurp(dir.path / "run1/checkpoint.bin") == slurp(dir.path / "run2/checkpoint.bin"));

    const std::string test_cmd = "test --checkpoint " + dir.str("run1/checkpoint.bin") +
                                 data_flags(dir) + kQuickTrain + " --seeds 1 2";
    REQUIRE(run(test_cmd + " --out " + dir.str("t1")) == 0);
    REQUIRE(run(test_cmd + " --out " + dir.str("t2")) == 0);
    CHECK(slurp(dir.path / "t1/report.json") == slurp(dir.path / "t2/report.json"));
}

TEST_CASE("config file values apply under CLI flags") {
    TempDir dir;
    {
        std::ofstream cfg(dir.path / "cfg.json");
        cfg << R"({"synth": {"n_entities": 33, "n_relations": 10, "triples_per_relation": 8}})";
    }
    REQUIRE(run("synth --config " + dir.str("cfg.json") + " --out " + dir.str("c")) == 0);
    // config file set 33 entities; config.json echo must carry it
    CHECK(slurp(dir.path / "c/config.json").find("\"n_entities\": 33") != std::string::npos);

    // a flag overrides the file
    REQUIRE(run("synth --config " + dir.str("cfg.json") + " --n-entities 44 --out " +
                dir.str("d")) == 0);
    CHECK(slurp(dir.path / "d/config.json").find("\"n_entities\": 44") != std::string::npos);
}

TEST_CASE("user errors exit with status 2") {
    TempDir dir;
    CHECK(run("train --out " + dir.str("x") + " --triples /nonexistent.tsv") == 2);
    CHECK(run("definitely-not-a-command") == 2);
    CHECK(run("synth --out " + dir.str("y") + " --complementarity 3.0") == 2);
    CHECK(run("test --out " + dir.str("z") + " --checkpoint /nonexistent.bin") == 2);
    CHECK(run("sweep --out " + dir.str("w") + " --axis nonsense --values 1") == 2);
    CHECK(run("train --config /nonexistent.json") == 2);
}

TEST_CASE("ablate writes one report block per mode") {
    TempDir dir;
    make_data(dir);
    REQUIRE(run("ablate --out " + dir.str("abl") + data_flags(dir) + kQuickTrain +
                " --modes full no_adapters --seeds 1") == 0);
    const std::string report = slurp(dir.path / "abl/report.json");
    CHECK(report.find("\"full\"") != std::string::npos);
    CHECK(report.find("\"no_adapters\"") != std::string::npos);
}

TEST_CASE("sweep writes one csv row per value") {
    TempDir dir;
    make_data(dir);
    REQUIRE(run("sweep --out " + dir.str("sw") + data_flags(dir) + kQuickTrain +
                " --axis K --values 1 3 --seeds 1") == 0);
    const std::string csv = slurp(dir.path / "sw/sweep.csv");
    CHECK(csv.find("axis,value,mrr") != std::string::npos);
    CHECK(csv.find("K,1,") != std::string::npos);
    CHECK(csv.find("K,3,") != std::string::npos);
}
