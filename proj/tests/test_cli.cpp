#include "doctest.h"
#include "support.hpp"

#include "hmsom/cli.hpp"
#include "hmsom/serialize.hpp"

#include <sstream>

namespace {

struct run_result {
    int code = 0;
    std::string out;
    std::string err;
};

run_result run(std::vector<std::string> args) {
    args.insert(args.begin(), "hmsom");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = hmsom::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

bool contains(const std::string& text, const std::string& part) { return text.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("usage errors exit with 1") {
    const auto none = run({});
    CHECK(none.code == 1);
    CHECK(contains(none.err, "generate"));

    const auto bad = run({"train", "--data", "x.csv", "--bundle", "b.json", "--no-such-flag"});
    CHECK(bad.code == 1);
    CHECK(contains(bad.err, "--no-such-flag"));

    const auto missing = run({"detect", "--bundle", "b.json"});
    CHECK(missing.code == 1);

    const auto mode = run({"--mode", "sideways", "detect", "--bundle", "b", "--data", "d", "--out", "o"});
    CHECK(mode.code == 1);
}

TEST_CASE("help exits with 0") {
    const auto top = run({"--help"});
    CHECK(top.code == 0);
    CHECK(contains(top.out, "export-maps"));
    const auto sub = run({"train", "--help"});
    CHECK(sub.code == 0);
    CHECK(contains(sub.out, "--smoothing-width"));
}

TEST_CASE("data errors exit with 2 and name the file") {
    testing::temp_dir dir("cli_err");
    const auto r = run({"detect", "--bundle", dir / "absent.json", "--data", dir / "d.csv", "--out", dir / "v.csv"});
    CHECK(r.code == 2);
    CHECK(contains(r.err, "absent.json"));

    hmsom::io::write_file(dir / "bad.csv", "ENG,TIME,EXH\n1,2,3\n");
    const auto t = run({"train", "--data", dir / "bad.csv", "--bundle", dir / "b.json"});
    CHECK(t.code == 2);
    CHECK(contains(t.err, "bad.csv"));
}

TEST_CASE("generate, train, inject, detect and eval from the command line") {
    testing::temp_dir dir("cli_flow");
    REQUIRE(run({"generate", "--out", dir / "train.csv", "--rows", "900", "--truth", dir / "truth.json"}).code == 0);
    REQUIRE(run({"--seed", "2", "generate", "--out", dir / "test.csv", "--rows", "236", "--engines", "2"}).code == 0);

    const auto train = run({"train", "--data", dir / "train.csv", "--bundle", dir / "b.json", "--epochs", "8"});
    REQUIRE(train.code == 0);
    CHECK(contains(train.out, "smoothed residuals:   804"));
    CHECK(contains(train.out, "8 epochs"));

    const auto inj = run({"inject", "--data", dir / "test.csv", "--signature", "Defect 6", "--bundle", dir / "b.json",
                          "--out", dir / "bad.csv", "--record", dir / "rec.json"});
    REQUIRE(inj.code == 0);
    CHECK(contains(inj.out, "injected 'Defect 6'"));
    CHECK(hmsom::io::records_from_json(hmsom::io::read_file(dir / "rec.json")).front().length == 30);

    const auto det = run({"--mode", "local", "detect", "--bundle", dir / "b.json", "--data", dir / "bad.csv", "--out",
                          dir / "v.csv", "--truth", dir / "rec.json", "--plot", dir / "p.svg"});
    REQUIRE(det.code == 0);
    CHECK(contains(det.out, "of 224 rows flagged (local mode)"));
    CHECK(contains(det.out, "tpr "));
    CHECK(hmsom::io::read_file(dir / "p.svg").rfind("<svg", 0) == 0);

    const auto ev = run({"eval", "--verdicts", dir / "v.csv", "--truth", dir / "rec.json", "--out", dir / "r.csv"});
    REQUIRE(ev.code == 0);
    CHECK(contains(hmsom::io::read_file(dir / "r.csv"), "Overall,"));

    const auto bench = run({"eval", "--bundle", dir / "b.json", "--data", dir / "test.csv"});
    REQUIRE(bench.code == 0);
    CHECK(contains(bench.out, "Defect 12"));

    const auto maps = run({"export-maps", "--bundle", dir / "b.json", "--out-dir", dir / "maps"});
    REQUIRE(maps.code == 0);
    CHECK(contains(maps.out, "EXH.pgm"));

    CHECK(run({"eval", "--verdicts", dir / "v.csv"}).code == 1);
}

TEST_CASE("configuration files layer under command-line flags") {
    testing::temp_dir dir("cli_cfg");
    REQUIRE(run({"generate", "--out", dir / "train.csv", "--rows", "600"}).code == 0);
    hmsom::io::write_file(dir / "c.json", R"({"train": {"epochs": 3, "som": "4x4"}})");
    hmsom::io::write_file(dir / "c.toml", "[train]\nepochs = 4\nsom = \"3x5\"\n");

    const auto j = run({"--config", dir / "c.json", "train", "--data", dir / "train.csv", "--bundle", dir / "a.json"});
    REQUIRE(j.code == 0);
    CHECK(contains(j.out, "map:                  4x4, 3 epochs"));

    const auto t = run({"--config", dir / "c.toml", "train", "--data", dir / "train.csv", "--bundle", dir / "b.json"});
    REQUIRE(t.code == 0);
    CHECK(contains(t.out, "map:                  3x5, 4 epochs"));

    const auto o = run({"--config", dir / "c.json", "train", "--data", dir / "train.csv", "--bundle", dir / "c.json.out",
                        "--epochs", "2"});
    REQUIRE(o.code == 0);
    CHECK(contains(o.out, "map:                  4x4, 2 epochs"));

    hmsom::io::write_file(dir / "broken.json", "{\"train\": ");
    CHECK(run({"--config", dir / "broken.json", "train", "--data", dir / "train.csv", "--bundle", dir / "x"}).code ==
          1);
}

TEST_CASE("identical invocations write identical files") {
    testing::temp_dir dir("cli_repro");
    for (const char* tag : {"a", "b"}) {
        const std::string t(tag);
        REQUIRE(run({"--seed", "7", "generate", "--out", dir / (t + ".csv"), "--rows", "500"}).code == 0);
        REQUIRE(run({"train", "--data", dir / (t + ".csv"), "--bundle", dir / (t + ".json"), "--epochs", "5"}).code ==
                0);
    }
    CHECK(hmsom::io::read_file(dir / "a.csv") == hmsom::io::read_file(dir / "b.csv"));
    CHECK(hmsom::io::read_file(dir / "a.json") == hmsom::io::read_file(dir / "b.json"));
}
