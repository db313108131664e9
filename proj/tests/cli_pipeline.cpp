// End-to-end checks of the command-line tool: runs the real binary (path from
// argv[1]) through synth -> split -> train -> eval -> explain -> analyze in a
// scratch directory and inspects exit codes and outputs.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "anp/dataio.hpp"
#include "anp/fusion.hpp"

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    if (ok) {
        std::cout << "[ok] " << what << '\n';
    } else {
        std::cout << "[FAIL] " << what << '\n';
        ++failures;
    }
}

std::string g_cli;

int run(const std::string& args) {
    const std::string cmd = g_cli + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

int run_loud(const std::string& args, std::string& output, const fs::path& tmp) {
    const fs::path log = tmp / "cmd_output.txt";
    const std::string cmd = g_cli + " " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream buf;
    buf << in.rdbuf();
    output = buf.str();
    return rc;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (const char c : text)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_pipeline <path-to-cli>\n";
        return 2;
    }
    g_cli = argv[1];

    const fs::path tmp = fs::temp_directory_path() / ("anp_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    // Minimal synthetic problem: 2 adjectives x 2 nouns, strong signal.
    const fs::path cfg = tmp / "synth.cfg";
    write_file(cfg,
               "n_adj = 2\n"
               "n_noun = 2\n"
               "samples_per_anp = 100\n"
               "adj_signal = 6\n"
               "noun_signal = 6\n"
               "noise_temp = 1\n"
               "seed = 20\n");

    const fs::path data_dir = tmp / "data";
    check(run("synth --config " + cfg.string() + " --out-dir " + data_dir.string()) == 0,
          "synth exits 0");
    check(fs::exists(data_dir / "dataset.anpd"), "synth writes the dataset");
    check(fs::exists(data_dir / "adjectives.txt") && fs::exists(data_dir / "nouns.txt") &&
              fs::exists(data_dir / "anps.csv"),
          "synth writes the vocabulary");
    check(fs::exists(data_dir / "manifest_synth.json"), "synth writes a manifest");

    {
        const anp::Dataset data = anp::read_dataset(data_dir / "dataset.anpd");
        check(data.samples.size() == 400 && data.n_anp == 4, "synth dataset has the configured shape");
    }

    // Same config, same seed: byte-identical dataset.
    const fs::path data_dir2 = tmp / "data2";
    check(run("synth --config " + cfg.string() + " --out-dir " + data_dir2.string()) == 0,
          "second synth exits 0");
    check(slurp(data_dir / "dataset.anpd") == slurp(data_dir2 / "dataset.anpd"),
          "synth output is byte-identical under the same seed");

    // Config with a missing key fails loudly and names the key.
    const fs::path bad_cfg = tmp / "bad.cfg";
    write_file(bad_cfg, "n_adj = 2\nn_noun = 2\nsamples_per_anp = 5\nadj_signal = 1\nseed = 1\n");
    {
        std::string out;
        const int rc = run_loud("synth --config " + bad_cfg.string() + " --out-dir " +
                                    (tmp / "never").string(),
                                out, tmp);
        check(rc != 0, "synth with a missing key exits nonzero");
        check(out.find("noun_signal") != std::string::npos, "the error names the missing key");
    }

    const fs::path split_dir = tmp / "split";
    check(run("split --dataset " + (data_dir / "dataset.anpd").string() +
              " --train-fraction 0.8 --seed 7 --out-dir " + split_dir.string()) == 0,
          "split exits 0");
    {
        const anp::Dataset train = anp::read_dataset(split_dir / "train.anpd");
        const anp::Dataset test = anp::read_dataset(split_dir / "test.anpd");
        check(train.samples.size() == 320 && test.samples.size() == 80,
              "split respects the 80-20 floor rule");
    }

    const fs::path run_dir = tmp / "run";
    check(run("train --dataset " + (split_dir / "train.anpd").string() + " --vocab-dir " +
              data_dir.string() + " --out-dir " + run_dir.string() +
              " --seed 3 --epochs 8 --batch-size 32 --hidden 32") == 0,
          "train exits 0");
    check(fs::exists(run_dir / "checkpoint.anpm"), "train writes a checkpoint");
    {
        const std::string history = slurp(run_dir / "history.csv");
        check(count_lines(history) == 9, "history has one row per epoch plus a header");
        check(history.rfind("epoch,train_loss,val_top1_pct,val_top5_pct", 0) == 0,
              "history header is stable");
    }

    // Zero learning rate leaves the checkpoint at initialization, and equal
    // seeds give byte-identical checkpoints.
    const fs::path frozen_a = tmp / "frozen_a";
    const fs::path frozen_b = tmp / "frozen_b";
    for (const auto& dir : {frozen_a, frozen_b})
        check(run("train --dataset " + (split_dir / "train.anpd").string() + " --vocab-dir " +
                  data_dir.string() + " --out-dir " + dir.string() +
                  " --seed 3 --epochs 2 --batch-size 32 --hidden 16 --lr 0") == 0,
              "zero-lr train exits 0");
    check(slurp(frozen_a / "checkpoint.anpm") == slurp(frozen_b / "checkpoint.anpm"),
          "identical runs produce byte-identical checkpoints");
    {
        const anp::FusionNetwork frozen = anp::load_checkpoint(frozen_a / "checkpoint.anpm");
        const anp::FusionNetwork init = anp::build_anpnet({2, 2, 16, 4}, 3);
        check(frozen.hidden.weights.data == init.hidden.weights.data &&
                  frozen.output.weights.data == init.output.weights.data,
              "zero learning rate keeps parameters at initialization");
    }

    const fs::path eval_dir = tmp / "eval";
    check(run("eval --checkpoint " + (run_dir / "checkpoint.anpm").string() + " --dataset " +
              (split_dir / "test.anpd").string() + " --vocab-dir " + data_dir.string() +
              " --k 2 --out-dir " + eval_dir.string()) == 0,
          "eval exits 0");
    {
        const std::string accuracy = slurp(eval_dir / "accuracy.csv");
        check(accuracy.find("anp,1,") != std::string::npos &&
                  accuracy.find("anp,2,") != std::string::npos,
              "eval emits both top-1 and top-k rows");
        const std::string codet = slurp(eval_dir / "codetection.csv");
        check(codet.find("adjective,") != std::string::npos, "codetection table present");
        check(fs::exists(eval_dir / "histogram.csv") && fs::exists(eval_dir / "per_class_anp.csv"),
              "eval writes histogram and per-class tables");
    }

    // Empty test set: nonzero exit.
    {
        anp::Dataset empty;
        empty.n_adj = 2;
        empty.n_noun = 2;
        empty.n_anp = 4;
        anp::write_dataset(tmp / "empty.anpd", empty);
        check(run("eval --checkpoint " + (run_dir / "checkpoint.anpm").string() + " --dataset " +
                  (tmp / "empty.anpd").string() + " --vocab-dir " + data_dir.string() +
                  " --out-dir " + (tmp / "eval_empty").string()) != 0,
              "eval on an empty dataset exits nonzero");
    }

    const fs::path explain_dir = tmp / "explain";
    check(run("explain --checkpoint " + (run_dir / "checkpoint.anpm").string() + " --dataset " +
              (split_dir / "test.anpd").string() + " --vocab-dir " + data_dir.string() +
              " --sample 0 --target 0 --out-dir " + explain_dir.string()) == 0,
          "explain exits 0");
    {
        const std::string report = slurp(explain_dir / "relevance.csv");
        check(report.rfind("branch,concept,contribution", 0) == 0, "relevance header is stable");
        check(count_lines(report) == 5, "relevance report covers every adjective and noun");
        std::string out;
        run_loud("explain --checkpoint " + (run_dir / "checkpoint.anpm").string() + " --dataset " +
                     (split_dir / "test.anpd").string() + " --vocab-dir " + data_dir.string() +
                     " --sample 0 --target \"adj0 noun1\" --out-dir " + explain_dir.string(),
                 out, tmp);
        check(out.find("root_relevance:") != std::string::npos &&
                  out.find("contribution_sum:") != std::string::npos,
              "explain prints the conservation checksum and accepts names");
    }

    for (const std::string which : {"anr", "orientation", "equiv", "related"}) {
        const fs::path dir = tmp / ("analyze_" + which);
        check(run("analyze --checkpoint " + (run_dir / "checkpoint.anpm").string() + " --dataset " +
                  (split_dir / "test.anpd").string() + " --vocab-dir " + data_dir.string() +
                  " --which " + which + " --mode all-top5 --k 2 --out-dir " + dir.string()) == 0,
              "analyze --which " + which + " exits 0");
    }
    {
        const std::string related = slurp(tmp / "analyze_related" / "related.csv");
        // k=2 on a 2x2 vocabulary: exactly 2 adjectives + 2 nouns per anp.
        check(count_lines(related) == 1 + 4 * 4, "related table has k rows per branch per anp");
        const std::string anr = slurp(tmp / "analyze_anr" / "anr.csv");
        check(anr.rfind("anp,name,mode,anr,n_samples", 0) == 0, "anr header is stable");
        check(anr.find("all-top5") != std::string::npos, "anr rows carry the mode");
    }

    // The conditioned-anr family uses the same table with a different mode tag.
    {
        const fs::path dir = tmp / "analyze_anr_correct";
        check(run("analyze --checkpoint " + (run_dir / "checkpoint.anpm").string() + " --dataset " +
                  (split_dir / "test.anpd").string() + " --vocab-dir " + data_dir.string() +
                  " --which anr --mode anp-correct --k 2 --out-dir " + dir.string()) == 0,
              "analyze --which anr --mode anp-correct exits 0");
        const std::string anr = slurp(dir / "anr.csv");
        check(anr.find("anp-correct") != std::string::npos, "conditioned anr rows carry their mode");
    }

    // Unknown mode is rejected.
    check(run("analyze --checkpoint " + (run_dir / "checkpoint.anpm").string() + " --dataset " +
              (split_dir / "test.anpd").string() + " --vocab-dir " + data_dir.string() +
              " --which anr --mode sometimes --out-dir " + (tmp / "never2").string()) != 0,
          "analyze with an unknown mode exits nonzero");

    if (failures == 0) fs::remove_all(tmp);
    std::cout << (failures == 0 ? "all cli checks passed\n"
                                : std::to_string(failures) + " cli check(s) failed\n");
    return failures == 0 ? 0 : 1;
}
