#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "anp/analysis.hpp"
#include "anp/csv.hpp"
#include "anp/dataio.hpp"
#include "anp/fusion.hpp"
#include "anp/metrics.hpp"
#include "anp/relevance.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

struct ManifestWriter {
    std::string command;
    json config = json::object();
    json inputs = json::array();
    json outputs = json::array();
    std::optional<std::uint64_t> seed;
    Clock::time_point started = Clock::now();

    void add_output(const fs::path& p) { outputs.push_back(p.string()); }
    void add_input(const fs::path& p) { inputs.push_back(p.string()); }

    void write(const fs::path& out_dir) {
        json m;
        m["command"] = command;
        if (seed) m["seed"] = *seed;
        m["config"] = config;
        m["inputs"] = inputs;
        m["outputs"] = outputs;
        m["format_versions"] = {{"dataset", anp::kDatasetFormatVersion},
                                {"checkpoint", anp::kCheckpointFormatVersion}};
        m["duration_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started).count();
        const fs::path path = out_dir / ("manifest_" + command + ".json");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw anp::IoError("cannot open for writing: " + path.string());
        out << m.dump(2) << '\n';
    }
};

void ensure_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw anp::IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

anp::Dataset load_dataset_with_vocab(const fs::path& dataset_path, const anp::Vocabulary& vocab) {
    anp::Dataset data = anp::read_dataset(dataset_path);
    anp::check_dataset_against_vocab(data, vocab);
    return data;
}

anp::FusionNetwork load_checkpoint_for_vocab(const fs::path& path, const anp::Vocabulary& vocab) {
    anp::FusionNetwork net = anp::load_checkpoint(path);
    if (net.dims.n_adj != vocab.n_adj() || net.dims.n_noun != vocab.n_noun() ||
        net.dims.n_anp != vocab.n_anp())
        throw anp::DimMismatchError("checkpoint dimensions disagree with the vocabulary");
    return net;
}

// ---- synth --------------------------------------------------------------

int cmd_synth(const fs::path& config_path, const fs::path& out_dir) {
    ManifestWriter manifest;
    manifest.command = "synth";
    manifest.add_input(config_path);

    const anp::SynthConfig cfg = anp::parse_synth_config(config_path);
    manifest.seed = cfg.seed;
    manifest.config["config_file"] = config_path.string();
    manifest.config["n_adj"] = cfg.n_adj;
    manifest.config["n_noun"] = cfg.n_noun;
    manifest.config["samples_per_anp"] = cfg.samples_per_anp;
    manifest.config["noise_temp"] = cfg.noise_temp;

    auto [vocab, samples] = anp::synth_generate(cfg);
    const auto report = anp::validate_vocab(vocab);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';

    ensure_out_dir(out_dir);
    anp::write_vocab(vocab, out_dir);
    anp::Dataset data;
    data.n_adj = static_cast<std::uint32_t>(vocab.n_adj());
    data.n_noun = static_cast<std::uint32_t>(vocab.n_noun());
    data.n_anp = static_cast<std::uint32_t>(vocab.n_anp());
    data.samples = std::move(samples);
    const fs::path dataset_path = out_dir / "dataset.anpd";
    anp::write_dataset(dataset_path, data);

    manifest.add_output(out_dir / "adjectives.txt");
    manifest.add_output(out_dir / "nouns.txt");
    manifest.add_output(out_dir / "anps.csv");
    manifest.add_output(dataset_path);
    manifest.write(out_dir);
    std::cout << "wrote " << data.samples.size() << " samples over " << data.n_anp << " anps to "
              << dataset_path.string() << '\n';
    return 0;
}

// ---- split ----------------------------------------------------------------

int cmd_split(const fs::path& dataset_path, double train_fraction, std::uint64_t seed,
              const fs::path& out_dir) {
    ManifestWriter manifest;
    manifest.command = "split";
    manifest.add_input(dataset_path);
    manifest.seed = seed;
    manifest.config["train_fraction"] = train_fraction;

    const anp::Dataset data = anp::read_dataset(dataset_path);
    auto [train, test] = anp::stratified_split(data.samples, data.n_anp, train_fraction, seed);

    ensure_out_dir(out_dir);
    anp::Dataset part;
    part.n_adj = data.n_adj;
    part.n_noun = data.n_noun;
    part.n_anp = data.n_anp;
    part.samples = std::move(train);
    anp::write_dataset(out_dir / "train.anpd", part);
    const std::size_t n_train = part.samples.size();
    part.samples = std::move(test);
    anp::write_dataset(out_dir / "test.anpd", part);

    manifest.add_output(out_dir / "train.anpd");
    manifest.add_output(out_dir / "test.anpd");
    manifest.write(out_dir);
    std::cout << "split " << data.samples.size() << " samples into " << n_train << " train / "
              << part.samples.size() << " test\n";
    return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
    fs::path dataset, vocab_dir, out_dir;
    anp::TrainConfig config;
    std::uint32_t hidden = 1024;
    double val_fraction = 0.0;
};

int cmd_train(const TrainArgs& args) {
    ManifestWriter manifest;
    manifest.command = "train";
    manifest.add_input(args.dataset);
    manifest.add_input(args.vocab_dir);
    manifest.seed = args.config.seed;
    manifest.config["epochs"] = args.config.epochs;
    manifest.config["batch_size"] = args.config.batch_size;
    manifest.config["learning_rate"] = args.config.learning_rate;
    manifest.config["momentum"] = args.config.momentum;
    manifest.config["weight_decay"] = args.config.weight_decay;
    manifest.config["hidden"] = args.hidden;
    manifest.config["val_fraction"] = args.val_fraction;
    manifest.config["shuffle"] = args.config.shuffle;

    const anp::Vocabulary vocab = anp::load_vocab(args.vocab_dir);
    const anp::Dataset data = load_dataset_with_vocab(args.dataset, vocab);
    if (data.samples.empty()) throw anp::ValueError("training dataset is empty");

    std::vector<anp::Sample> train_samples;
    std::vector<anp::Sample> val_samples;
    if (args.val_fraction > 0.0) {
        if (args.val_fraction >= 1.0) throw anp::ValueError("--val-fraction must lie in [0, 1)");
        auto [tr, val] = anp::stratified_split(data.samples, data.n_anp, 1.0 - args.val_fraction,
                                               args.config.seed);
        train_samples = std::move(tr);
        val_samples = std::move(val);
    } else {
        train_samples = data.samples;
    }

    anp::FusionDims dims{data.n_adj, data.n_noun, args.hidden, data.n_anp};
    anp::FusionNetwork net = anp::build_anpnet(dims, args.config.seed);
    const auto history = anp::train(net, train_samples,
                                    val_samples.empty() ? nullptr : &val_samples, args.config);

    ensure_out_dir(args.out_dir);
    const fs::path ckpt_path = args.out_dir / "checkpoint.anpm";
    anp::save_checkpoint(net, ckpt_path);

    const fs::path history_path = args.out_dir / "history.csv";
    anp::CsvWriter csv(history_path);
    csv.cell("epoch").cell("train_loss").cell("val_top1_pct").cell("val_top5_pct");
    csv.end_row();
    for (const auto& e : history) {
        csv.cell(static_cast<std::uint64_t>(e.epoch)).cell(e.train_loss);
        if (e.has_val)
            csv.cell(e.val_top1_pct).cell(e.val_top5_pct);
        else
            csv.empty_cell().empty_cell();
        csv.end_row();
    }
    csv.close();

    manifest.add_output(ckpt_path);
    manifest.add_output(history_path);
    manifest.write(args.out_dir);
    std::cout << "trained " << args.config.epochs << " epochs, final loss "
              << anp::format_fixed(history.back().train_loss) << ", checkpoint at "
              << ckpt_path.string() << '\n';
    return 0;
}

// ---- eval ---------------------------------------------------------------------

void write_per_class_csv(const fs::path& path, const anp::PerClassAccuracy& acc,
                         const std::function<std::string(std::size_t)>& name_of) {
    anp::CsvWriter csv(path);
    csv.cell("class").cell("name").cell("n_samples").cell("accuracy_pct");
    csv.end_row();
    for (std::size_t c = 0; c < acc.n_classes(); ++c) {
        if (!acc.present(c)) continue;  // absent, not zero
        csv.cell(static_cast<std::uint64_t>(c)).cell(name_of(c)).cell(acc.count(c)).cell(acc.accuracy_pct(c));
        csv.end_row();
    }
    csv.close();
}

int cmd_eval(const fs::path& ckpt_path, const fs::path& dataset_path, const fs::path& vocab_dir,
             std::size_t k, double bin_width, const fs::path& out_dir) {
    ManifestWriter manifest;
    manifest.command = "eval";
    manifest.add_input(ckpt_path);
    manifest.add_input(dataset_path);
    manifest.add_input(vocab_dir);
    manifest.config["k"] = k;
    manifest.config["bin_width"] = bin_width;

    const anp::Vocabulary vocab = anp::load_vocab(vocab_dir);
    const anp::Dataset data = load_dataset_with_vocab(dataset_path, vocab);
    if (data.samples.empty()) throw anp::ValueError("evaluation dataset is empty");
    const anp::FusionNetwork net = load_checkpoint_for_vocab(ckpt_path, vocab);

    const std::vector<std::size_t> ks = (k == 1) ? std::vector<std::size_t>{1}
                                                 : std::vector<std::size_t>{1, k};
    std::vector<anp::PerClassAccuracy> adj_acc(ks.size(), anp::PerClassAccuracy(data.n_adj));
    std::vector<anp::PerClassAccuracy> noun_acc(ks.size(), anp::PerClassAccuracy(data.n_noun));
    std::vector<anp::PerClassAccuracy> anp_acc(ks.size(), anp::PerClassAccuracy(data.n_anp));
    anp::CoDetectionAccumulator codet;

    for (const auto& sample : data.samples) {
        const std::vector<float> logits = anp::predict_logits(net, sample);
        for (std::size_t i = 0; i < ks.size(); ++i) {
            adj_acc[i].add(sample.adj_label, anp::topk_hit(sample.adj_probs, sample.adj_label, ks[i]));
            noun_acc[i].add(sample.noun_label,
                            anp::topk_hit(sample.noun_probs, sample.noun_label, ks[i]));
            anp_acc[i].add(sample.anp_label, anp::topk_hit(logits, sample.anp_label, ks[i]));
        }
        codet.add(anp::topk_hit(sample.adj_probs, sample.adj_label, k),
                  anp::topk_hit(sample.noun_probs, sample.noun_label, k),
                  anp::topk_hit(logits, sample.anp_label, k));
    }

    ensure_out_dir(out_dir);

    {
        anp::CsvWriter csv(out_dir / "accuracy.csv");
        csv.cell("concept").cell("k").cell("n_samples").cell("accuracy_pct");
        csv.end_row();
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const char* names[3] = {"adjective", "noun", "anp"};
            const anp::PerClassAccuracy* accs[3] = {&adj_acc[i], &noun_acc[i], &anp_acc[i]};
            for (int c = 0; c < 3; ++c) {
                csv.cell(names[c]).cell(static_cast<std::uint64_t>(ks[i]));
                csv.cell(accs[c]->total_samples()).cell(accs[c]->overall_pct());
                csv.end_row();
            }
        }
        csv.close();
    }

    const std::size_t at_k = ks.size() - 1;
    write_per_class_csv(out_dir / "per_class_adj.csv", adj_acc[at_k],
                        [&](std::size_t c) { return vocab.adjectives[c]; });
    write_per_class_csv(out_dir / "per_class_noun.csv", noun_acc[at_k],
                        [&](std::size_t c) { return vocab.nouns[c]; });
    write_per_class_csv(out_dir / "per_class_anp.csv", anp_acc[at_k],
                        [&](std::size_t c) { return vocab.anp_name(c); });

    {
        const auto bins = anp::accuracy_histogram(anp_acc[at_k].present_accuracies(), bin_width);
        anp::CsvWriter csv(out_dir / "histogram.csv");
        csv.cell("bin_lo_pct").cell("bin_hi_pct").cell("n_classes");
        csv.end_row();
        for (std::size_t b = 0; b < bins.size(); ++b) {
            const double lo = bin_width * static_cast<double>(b);
            const double hi = std::min(100.0, bin_width * static_cast<double>(b + 1));
            csv.cell(lo, 2).cell(hi, 2).cell(bins[b]);
            csv.end_row();
        }
        csv.close();
    }

    {
        const anp::CoDetectionMatrix m = codet.finish();
        anp::CsvWriter csv(out_dir / "codetection.csv");
        csv.cell("given").cell("n_samples").cell("adj_pct").cell("noun_pct").cell("anp_pct");
        csv.end_row();
        const char* names[3] = {"adjective", "noun", "anp"};
        for (std::size_t r = 0; r < 3; ++r) {
            csv.cell(names[r]).cell(m.row_counts[r]);
            for (std::size_t c = 0; c < 3; ++c) {
                if (m.row_present(r))
                    csv.cell(m.pct[r][c]);
                else
                    csv.empty_cell();
            }
            csv.end_row();
        }
        csv.close();
    }

    manifest.add_output(out_dir / "accuracy.csv");
    manifest.add_output(out_dir / "per_class_adj.csv");
    manifest.add_output(out_dir / "per_class_noun.csv");
    manifest.add_output(out_dir / "per_class_anp.csv");
    manifest.add_output(out_dir / "histogram.csv");
    manifest.add_output(out_dir / "codetection.csv");
    manifest.write(out_dir);

    std::cout << "top-" << k << " accuracy: anp " << anp::format_fixed(anp_acc[at_k].overall_pct(), 2)
              << "% adj " << anp::format_fixed(adj_acc[at_k].overall_pct(), 2) << "% noun "
              << anp::format_fixed(noun_acc[at_k].overall_pct(), 2) << "%\n";
    return 0;
}

// ---- explain ----------------------------------------------------------------

int cmd_explain(const fs::path& ckpt_path, const fs::path& dataset_path, const fs::path& vocab_dir,
                std::uint64_t sample_index, const std::string& target, const fs::path& out_dir) {
    ManifestWriter manifest;
    manifest.command = "explain";
    manifest.add_input(ckpt_path);
    manifest.add_input(dataset_path);
    manifest.add_input(vocab_dir);
    manifest.config["sample"] = sample_index;
    manifest.config["target"] = target;

    const anp::Vocabulary vocab = anp::load_vocab(vocab_dir);
    const anp::Dataset data = load_dataset_with_vocab(dataset_path, vocab);
    const anp::FusionNetwork net = load_checkpoint_for_vocab(ckpt_path, vocab);
    if (sample_index >= data.samples.size())
        throw anp::ValueError("sample index " + std::to_string(sample_index) + " out of range (" +
                              std::to_string(data.samples.size()) + " samples)");

    std::uint32_t target_anp = 0;
    if (!target.empty() && target.find_first_not_of("0123456789") == std::string::npos) {
        target_anp = static_cast<std::uint32_t>(std::stoul(target));
        if (target_anp >= vocab.n_anp()) throw anp::ValueError("target anp index out of range");
    } else {
        const auto found = vocab.find_anp(target);
        if (!found) throw anp::ValueError("unknown anp name: '" + target + "'");
        target_anp = *found;
    }

    const anp::RelevanceReport report = anp::explain(net, data.samples[sample_index], target_anp);

    ensure_out_dir(out_dir);
    const fs::path report_path = out_dir / "relevance.csv";
    anp::CsvWriter csv(report_path);
    csv.cell("branch").cell("concept").cell("contribution");
    csv.end_row();
    for (std::size_t i = 0; i < report.adj_contrib.size(); ++i) {
        csv.cell("adjective").cell(vocab.adjectives[i]).cell(report.adj_contrib[i]);
        csv.end_row();
    }
    for (std::size_t i = 0; i < report.noun_contrib.size(); ++i) {
        csv.cell("noun").cell(vocab.nouns[i]).cell(report.noun_contrib[i]);
        csv.end_row();
    }
    csv.close();

    double total = 0.0;
    for (const double c : report.adj_contrib) total += c;
    for (const double c : report.noun_contrib) total += c;
    std::cout << "target: " << vocab.anp_name(target_anp) << " (" << target_anp << ")\n"
              << "root_relevance: " << anp::format_fixed(report.root_relevance) << '\n'
              << "contribution_sum: " << anp::format_fixed(total) << '\n'
              << "degenerate: " << (report.degenerate ? "true" : "false") << '\n';

    manifest.add_output(report_path);
    manifest.write(out_dir);
    return 0;
}

// ---- analyze ---------------------------------------------------------------

int cmd_analyze(const fs::path& ckpt_path, const fs::path& dataset_path, const fs::path& vocab_dir,
                const std::string& which, const std::string& mode_name, std::size_t k,
                const fs::path& out_dir) {
    ManifestWriter manifest;
    manifest.command = "analyze";
    manifest.add_input(ckpt_path);
    manifest.add_input(dataset_path);
    manifest.add_input(vocab_dir);
    manifest.config["which"] = which;
    manifest.config["mode"] = mode_name;
    manifest.config["k"] = k;

    const anp::Vocabulary vocab = anp::load_vocab(vocab_dir);
    const anp::Dataset data = load_dataset_with_vocab(dataset_path, vocab);
    if (data.samples.empty()) throw anp::ValueError("analysis dataset is empty");
    const anp::FusionNetwork net = load_checkpoint_for_vocab(ckpt_path, vocab);

    const auto mode = anp::anr_mode_from_name(mode_name);
    if (!mode) throw anp::ValueError("unknown anr mode: '" + mode_name + "'");

    ensure_out_dir(out_dir);

    if (which == "anr" || which == "orientation") {
        const auto records = anp::anr_table(net, data.samples, *mode, k);
        if (which == "anr") {
            anp::CsvWriter csv(out_dir / "anr.csv");
            csv.cell("anp").cell("name").cell("mode").cell("anr").cell("n_samples");
            csv.end_row();
            for (const auto& rec : records) {
                csv.cell(static_cast<std::uint64_t>(rec.anp)).cell(vocab.anp_name(rec.anp));
                csv.cell(anp::anr_mode_name(rec.mode)).cell(rec.anr).cell(rec.n_samples);
                csv.end_row();
            }
            csv.close();
            manifest.add_output(out_dir / "anr.csv");
        } else {
            const auto labels = anp::classify_orientation(records);
            anp::CsvWriter csv(out_dir / "orientation.csv");
            csv.cell("anp").cell("name").cell("anr").cell("orientation");
            csv.end_row();
            for (const auto& label : labels) {
                csv.cell(static_cast<std::uint64_t>(label.anp)).cell(vocab.anp_name(label.anp));
                csv.cell(label.anr).cell(anp::orientation_name(label.label));
                csv.end_row();
            }
            csv.close();
            manifest.add_output(out_dir / "orientation.csv");
        }
    } else if (which == "equiv") {
        const auto profiles = anp::aggregate_all_contributions(net, data.samples, k);
        const auto pairs = anp::visually_equivalent(profiles, k);
        anp::CsvWriter csv(out_dir / "equivalent.csv");
        csv.cell("anp_a").cell("name_a").cell("anp_b").cell("name_b");
        csv.end_row();
        for (const auto& [a, b] : pairs) {
            csv.cell(static_cast<std::uint64_t>(a)).cell(vocab.anp_name(a));
            csv.cell(static_cast<std::uint64_t>(b)).cell(vocab.anp_name(b));
            csv.end_row();
        }
        csv.close();
        manifest.add_output(out_dir / "equivalent.csv");
    } else if (which == "related") {
        const auto profiles = anp::aggregate_all_contributions(net, data.samples, k);
        anp::CsvWriter csv(out_dir / "related.csv");
        csv.cell("anp").cell("name").cell("branch").cell("rank").cell("concept").cell("score");
        csv.end_row();
        for (const auto& [anp_id, profile] : profiles) {
            const auto related = anp::related_concepts(profile, vocab, k);
            for (std::size_t r = 0; r < related.adjectives.size(); ++r) {
                csv.cell(static_cast<std::uint64_t>(anp_id)).cell(vocab.anp_name(anp_id));
                csv.cell("adjective").cell(static_cast<std::uint64_t>(r + 1));
                csv.cell(related.adjectives[r].first).cell(related.adjectives[r].second);
                csv.end_row();
            }
            for (std::size_t r = 0; r < related.nouns.size(); ++r) {
                csv.cell(static_cast<std::uint64_t>(anp_id)).cell(vocab.anp_name(anp_id));
                csv.cell("noun").cell(static_cast<std::uint64_t>(r + 1));
                csv.cell(related.nouns[r].first).cell(related.nouns[r].second);
                csv.end_row();
            }
        }
        csv.close();
        manifest.add_output(out_dir / "related.csv");
    } else {
        throw anp::ValueError("unknown analysis: '" + which + "' (expected anr|orientation|equiv|related)");
    }

    manifest.write(out_dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fused adjective/noun-to-ANP classifier with relevance analysis"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic vocabulary and dataset");
    fs::path synth_config, synth_out;
    synth->add_option("--config", synth_config, "Key-value config file")->required();
    synth->add_option("--out-dir", synth_out, "Output directory")->required();

    // split
    auto* split = app.add_subcommand("split", "Stratified train/test split of a dataset");
    fs::path split_dataset, split_out;
    double split_fraction = 0.8;
    std::uint64_t split_seed = 0;
    split->add_option("--dataset", split_dataset, "Dataset file")->required();
    split->add_option("--train-fraction", split_fraction, "Train fraction (default 0.8)");
    split->add_option("--seed", split_seed, "Shuffle seed")->required();
    split->add_option("--out-dir", split_out, "Output directory")->required();

    // train
    auto* train = app.add_subcommand("train", "Train the fusion network");
    TrainArgs train_args;
    train->add_option("--dataset", train_args.dataset, "Training dataset")->required();
    train->add_option("--vocab-dir", train_args.vocab_dir, "Vocabulary directory")->required();
    train->add_option("--out-dir", train_args.out_dir, "Output directory")->required();
    train->add_option("--seed", train_args.config.seed, "Init/shuffle seed")->required();
    train->add_option("--epochs", train_args.config.epochs, "Training epochs (default 30)");
    train->add_option("--batch-size", train_args.config.batch_size, "Batch size (default 128)");
    train->add_option("--lr", train_args.config.learning_rate, "Learning rate (default 0.01)");
    train->add_option("--momentum", train_args.config.momentum, "Momentum (default 0.9)");
    train->add_option("--weight-decay", train_args.config.weight_decay, "Weight decay (default 1e-4)");
    train->add_option("--hidden", train_args.hidden, "Hidden layer size (default 1024)");
    train->add_option("--val-fraction", train_args.val_fraction,
                      "Fraction of the training data held out for per-epoch validation");
    bool no_shuffle = false;
    train->add_flag("--no-shuffle", no_shuffle, "Keep sample order fixed across epochs");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    fs::path eval_ckpt, eval_dataset, eval_vocab, eval_out;
    std::size_t eval_k = 5;
    double eval_bin_width = 10.0;
    eval->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
    eval->add_option("--dataset", eval_dataset, "Dataset file")->required();
    eval->add_option("--vocab-dir", eval_vocab, "Vocabulary directory")->required();
    eval->add_option("--k", eval_k, "Top-k used for correctness (default 5)");
    eval->add_option("--bin-width", eval_bin_width, "Histogram bin width in percent (default 10)");
    eval->add_option("--out-dir", eval_out, "Output directory")->required();

    // explain
    auto* explain = app.add_subcommand("explain", "Relevance report for one sample and target ANP");
    fs::path expl_ckpt, expl_dataset, expl_vocab, expl_out;
    std::uint64_t expl_sample = 0;
    std::string expl_target;
    explain->add_option("--checkpoint", expl_ckpt, "Checkpoint file")->required();
    explain->add_option("--dataset", expl_dataset, "Dataset file")->required();
    explain->add_option("--vocab-dir", expl_vocab, "Vocabulary directory")->required();
    explain->add_option("--sample", expl_sample, "Sample index")->required();
    explain->add_option("--target", expl_target, "Target ANP index or name")->required();
    explain->add_option("--out-dir", expl_out, "Output directory")->required();

    // analyze
    auto* analyze = app.add_subcommand("analyze", "ANR, orientation, equivalence or related concepts");
    fs::path ana_ckpt, ana_dataset, ana_vocab, ana_out;
    std::string ana_which, ana_mode = "anp-correct";
    std::size_t ana_k = 5;
    analyze->add_option("--checkpoint", ana_ckpt, "Checkpoint file")->required();
    analyze->add_option("--dataset", ana_dataset, "Dataset file")->required();
    analyze->add_option("--vocab-dir", ana_vocab, "Vocabulary directory")->required();
    analyze->add_option("--which", ana_which, "anr | orientation | equiv | related")->required();
    analyze->add_option("--mode", ana_mode,
                        "anp-correct | anp-adj | anp-noun | anp-adj-noun | all-top5");
    analyze->add_option("--k", ana_k, "Top-k used throughout (default 5)");
    analyze->add_option("--out-dir", ana_out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_config, synth_out);
        if (split->parsed()) return cmd_split(split_dataset, split_fraction, split_seed, split_out);
        if (train->parsed()) {
            train_args.config.shuffle = !no_shuffle;
            return cmd_train(train_args);
        }
        if (eval->parsed())
            return cmd_eval(eval_ckpt, eval_dataset, eval_vocab, eval_k, eval_bin_width, eval_out);
        if (explain->parsed())
            return cmd_explain(expl_ckpt, expl_dataset, expl_vocab, expl_sample, expl_target, expl_out);
        if (analyze->parsed())
            return cmd_analyze(ana_ckpt, ana_dataset, ana_vocab, ana_which, ana_mode, ana_k, ana_out);
    } catch (const anp::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
