// Drives the built `lam` binary end to end through temp directories.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lam/config.hpp"
#include "lam/io.hpp"

#ifndef LAM_CLI_PATH
#error "LAM_CLI_PATH must point at the built lam binary"
#endif

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
    const std::string command = std::string(LAM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_tiny_config(const fs::path& dir) {
    lam::RunConfig config = lam::default_run_config();
    config.task = lam::TaskSpec{4, 4, 4, 2, 1.0, 3};
    config.train = lam::TrainConfig{3e-3, 1, 16, 48, 24, 3};
    config.encoder.n_layers = 2;
    config.encoder.d_model = 8;
    config.encoder.n_heads = 2;
    config.encoder.ffn_hidden = 8;
    config.encoder.max_seq_len = 8;
    config.encoder.d_in = 4;
    config.encoder.lam->input_dim = 8;
    config.encoder.lam->hidden_dims = {8};
    config.encoder.lam->max_seq_len = 8;
    config.encoder.seed = 3;
    const fs::path path = dir / "config.json";
    std::ofstream out(path);
    out << lam::run_config_to_json(config);
    return path;
}

}  // namespace

TEST_CASE("grad-check exits zero") {
    CHECK(run_cli("grad-check") == 0);
    CHECK(run_cli("grad-check --dims 2x3") == 0);
    CHECK(run_cli("grad-check --dims nonsense") == 1);
}

TEST_CASE("train writes the documented artifacts") {
    const fs::path dir = fresh_dir("lam_cli_train");
    const fs::path config = write_tiny_config(dir);
    CHECK(run_cli("train --config " + config.string() + " --out " + (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out" / "result.json"));
    CHECK(fs::exists(dir / "out" / "attention_hist.csv"));
    CHECK(fs::exists(dir / "out" / "records.json"));
    CHECK(fs::exists(dir / "out" / "masks" / "layer_0.csv"));
    CHECK(fs::exists(dir / "out" / "masks" / "layer_1.csv"));
    const std::string result = read_file(dir / "out" / "result.json");
    CHECK(result.find("\"eval_acc\"") != std::string::npos);
    CHECK(result.find("\"seconds\"") != std::string::npos);
    const std::string hist = read_file(dir / "out" / "attention_hist.csv");
    CHECK(hist.rfind("bin_lo,bin_hi,count\n", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("train rejects bad configs with exit 1") {
    const fs::path dir = fresh_dir("lam_cli_badcfg");
    std::ofstream(dir / "bad.json") << "{\"task\":{},\"train\":{},\"encoder\":{},\"zzz\":0}";
    CHECK(run_cli("train --config " + (dir / "bad.json").string()) == 1);
    CHECK(run_cli("train --config " + (dir / "missing.json").string()) == 1);
    fs::remove_all(dir);
}

TEST_CASE("ablate strategies emits one row per arm and seed") {
    const fs::path dir = fresh_dir("lam_cli_ablate");
    const fs::path config = write_tiny_config(dir);
    CHECK(run_cli("ablate --kind strategies --config " + config.string() + " --out " +
                  (dir / "out").string() + " --seeds 1,2") == 0);
    const std::string csv = read_file(dir / "out" / "ablation.csv");
    CHECK(csv.rfind("arm,seed,param_count,train_acc,eval_acc,fraction_below,skewness,seconds\n",
                    0) == 0);
    std::size_t lines = 0;
    for (char ch : csv) lines += ch == '\n' ? 1 : 0;
    CHECK(lines == 1 + 4 * 2);  // header + 4 arms x 2 seeds
    CHECK(fs::exists(dir / "out" / "full_attention_seed1" / "result.json"));
    CHECK(fs::exists(dir / "out" / "multi_layer_lam_seed2" / "result.json"));
    CHECK(run_cli("ablate --kind nonsense --config " + config.string()) == 1);
    fs::remove_all(dir);
}

TEST_CASE("analyze reads records and writes stats") {
    const fs::path dir = fresh_dir("lam_cli_analyze");
    const fs::path config = write_tiny_config(dir);
    REQUIRE(run_cli("train --config " + config.string() + " --out " + (dir / "out").string()) == 0);
    const fs::path stats = dir / "stats.json";
    CHECK(run_cli("analyze --records " + (dir / "out" / "records.json").string() +
                  " --epsilon 0.01 --out " + stats.string()) == 0);
    const std::string text = read_file(stats);
    CHECK(text.find("\"fraction_below\"") != std::string::npos);
    CHECK(text.find("\"skewness\"") != std::string::npos);
    CHECK(run_cli("analyze --records " + (dir / "missing.json").string()) == 1);
    fs::remove_all(dir);
}
