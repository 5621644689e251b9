#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "agedist/kvconfig.hpp"

using namespace agedist;

TEST_CASE("set/get and ordered header output") {
    KvConfig kv;
    kv.set("command", "train");
    kv.set("alpha", 0.1);
    kv.set("epochs", 30);
    kv.set("seed", std::uint64_t{7});
    kv.set("alpha", 0.2);  // update keeps position

    CHECK(kv.get("command") == "train");
    CHECK(kv.get("alpha") == "0.2");
    CHECK(kv.get("missing") == std::nullopt);

    std::ostringstream out;
    kv.write_header(out);
    CHECK(out.str() ==
          "# command = train\n# alpha = 0.2\n# epochs = 30\n# seed = 7\n");
}

TEST_CASE("doubles are formatted to round trip exactly") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-5) == "1e-05");
    for (double v : {0.1, 1.0 / 3.0, 2.5e-17, 123456.789}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("config files parse key = value lines") {
    namespace fs = std::filesystem;
    const std::string path = (fs::temp_directory_path() / "agedist_cfg.txt").string();
    std::ofstream(path) << "# a comment\n"
                        << "loss = dc\n"
                        << "alpha=0.05\n"
                        << "\n"
                        << "  epochs =  12 \n";
    const KvConfig kv = parse_config_file(path);
    CHECK(kv.get("loss") == "dc");
    CHECK(kv.get("alpha") == "0.05");
    CHECK(kv.get("epochs") == "12");
    fs::remove(path);
}

TEST_CASE("malformed config lines are rejected with the line number") {
    namespace fs = std::filesystem;
    const std::string path = (fs::temp_directory_path() / "agedist_badcfg.txt").string();
    std::ofstream(path) << "loss = dc\nnot a pair\n";
    CHECK_THROWS_WITH_AS(parse_config_file(path), doctest::Contains(":2"),
                         std::runtime_error);
    fs::remove(path);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/agedist.cfg"), std::runtime_error);
}
