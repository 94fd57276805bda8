// Command-line driver: trains artifacts, runs sweeps, verifies the
// constellation theory, and renders plots. All behavior is driven by a JSON
// config; every subcommand is deterministic given (config, seed).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "semqam/pipeline.hpp"

namespace {

using namespace semqam;

json with_provenance(json j, const ExperimentConfig& cfg) {
    j["provenance"] = {{"seed", cfg.seed}, {"config_hash", config_hash(cfg)}};
    return j;
}

bool provenance_matches(const json& j, const ExperimentConfig& cfg) {
    return j.contains("provenance") && j["provenance"].value("config_hash", std::uint64_t(0)) ==
                                           config_hash(cfg) &&
           j["provenance"].value("seed", std::uint64_t(0)) == cfg.seed;
}

std::string path_in(const ExperimentConfig& cfg, const std::string& name) {
    return cfg.out_dir + "/" + name;
}

ConceptCodebook obtain_codebook(const ExperimentConfig& cfg, const ImageDataset& train) {
    const std::string path = path_in(cfg, "codebook.json");
    if (std::filesystem::exists(path)) {
        const json j = load_json(path);
        if (provenance_matches(j, cfg)) return codebook_from_json(j);
    }
    std::vector<std::vector<double>> pool;
    {
        std::vector<std::vector<double>> all;
        for (const auto& img : train.images) {
            PatchGrid g = patchify(img, train.height, train.width, cfg.patch.target_side,
                                   cfg.patch.patch_side);
            for (auto& p : g.patches) all.push_back(std::move(p));
        }
        Rng rng(mix_seed(cfg.seed, 0x9001, 0));
        if (int(all.size()) <= cfg.codebook.max_patches) {
            pool = std::move(all);
        } else {
            pool.reserve(cfg.codebook.max_patches);
            for (int i = 0; i < cfg.codebook.max_patches; ++i)
                pool.push_back(all[rng.below(all.size())]);
        }
    }
    ConceptCodebook cb =
        train_codebook(pool, cfg.m_order, cfg.seed, cfg.codebook.max_iters, cfg.codebook.tol);
    save_json(path, with_provenance(codebook_to_json(cb), cfg));
    return cb;
}

int cmd_ingest(const ExperimentConfig& cfg) {
    auto [train, test] = load_split_dataset(cfg);
    const auto timg = write_idx_images(train);
    const auto tlab = write_idx_labels(train);
    const auto simg = write_idx_images(test);
    const auto slab = write_idx_labels(test);
    auto dump = [&](const std::string& name, const std::vector<std::uint8_t>& bytes) {
        std::ofstream out(path_in(cfg, name), std::ios::binary);
        if (!out) throw ConfigError("cannot write " + name);
        out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    };
    dump("train_images.idx", timg);
    dump("train_labels.idx", tlab);
    dump("test_images.idx", simg);
    dump("test_labels.idx", slab);
    json summary = format_header("ingest-summary");
    summary["train_count"] = train.images.size();
    summary["test_count"] = test.images.size();
    summary["height"] = train.height;
    summary["width"] = train.width;
    summary["num_classes"] = train.num_classes;
    summary["slots"] = cfg.patch.slots();
    save_json(path_in(cfg, "ingest.json"), with_provenance(summary, cfg));
    std::printf("ingested %zu train / %zu test images (%dx%d, %d classes)\n",
                train.images.size(), test.images.size(), train.height, train.width,
                train.num_classes);
    return 0;
}

int cmd_train_codebook(const ExperimentConfig& cfg) {
    auto [train, test] = load_split_dataset(cfg);
    (void)test;
    const ConceptCodebook cb = obtain_codebook(cfg, train);
    std::printf("codebook: M=%zu entries, %d bits/symbol -> %s\n", cb.entries.size(),
                cb.bits_per_symbol, path_in(cfg, "codebook.json").c_str());
    return 0;
}

int cmd_train_classifier(const ExperimentConfig& cfg) {
    auto [train, test] = load_split_dataset(cfg);
    const TaskClassifier clf =
        train_classifier(train, cfg.classifier.epochs, cfg.classifier.learning_rate,
                         cfg.classifier.batch_size, cfg.seed);
    save_json(path_in(cfg, "classifier.json"), with_provenance(classifier_to_json(clf), cfg));
    std::printf("classifier: train accuracy %.4f, test accuracy %.4f -> %s\n",
                classifier_accuracy(clf, train), classifier_accuracy(clf, test),
                path_in(cfg, "classifier.json").c_str());
    return 0;
}

int cmd_stats(const ExperimentConfig& cfg) {
    auto [train, test] = load_split_dataset(cfg);
    (void)test;
    const ConceptCodebook cb = obtain_codebook(cfg, train);
    const int N = cfg.patch.slots();
    std::vector<std::vector<int>> indices(train.images.size());
    for (std::size_t i = 0; i < train.images.size(); ++i) {
        const PatchGrid g = patchify(train.images[i], train.height, train.width,
                                     cfg.patch.target_side, cfg.patch.patch_side);
        indices[i] = quantize_grid(cb, g);
    }
    const SciModel sci = estimate_sci(indices, train.labels, cfg.m_order, N, train.num_classes);
    std::vector<ConceptGrid> grids(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) grids[i] = make_concept_grid(sci, indices[i]);
    const SourceStatistics st = compute_statistics(grids, cfg.m_order);
    save_json(path_in(cfg, "sci_model.json"), with_provenance(sci_model_to_json(sci), cfg));
    save_json(path_in(cfg, "stats.json"), with_provenance(stats_to_json(st), cfg));
    std::printf("stats: mean SCI %.6f, delta %.6f, gamma %.6g -> %s\n", st.mean_sci,
                st.concentration, st.asymmetry, path_in(cfg, "stats.json").c_str());
    return 0;
}

int cmd_train_constellation(const ExperimentConfig& cfg) {
    const std::string stats_path = path_in(cfg, "stats.json");
    SourceStatistics st;
    if (std::filesystem::exists(stats_path) &&
        provenance_matches(load_json(stats_path), cfg)) {
        st = stats_from_json(load_json(stats_path));
    } else {
        const int rc = cmd_stats(cfg);
        if (rc != 0) return rc;
        st = stats_from_json(load_json(stats_path));
    }
    const Constellation gray = gray_qam(cfg.m_order, cfg.power);
    TrainConfig tc = cfg.train;
    tc.seed = mix_seed(cfg.seed, 0x5e11, 0);
    const Constellation learned =
        train_constellation(stats_stream(st), cfg.m_order, cfg.power, tc);
    save_json(path_in(cfg, "constellation_gray.json"),
              constellation_to_json(gray, cfg.seed, config_hash(cfg)));
    save_json(path_in(cfg, "constellation_learned.json"),
              constellation_to_json(learned, cfg.seed, config_hash(cfg)));
    std::printf("constellations: S_w gray %.6g, learned %.6g -> %s\n", weighted_ssv(gray, st),
                weighted_ssv(learned, st), path_in(cfg, "constellation_learned.json").c_str());
    return 0;
}

int cmd_rl_train(const ExperimentConfig& cfg) {
    const Artifacts art = build_artifacts(cfg);
    QAgent agent = make_agent(cfg.agent.bins,
                              action_space(cfg.agent.k_min, cfg.agent.k_max,
                                           cfg.agent.num_actions),
                              cfg.train.snr_min_db, cfg.train.snr_max_db);
    agent.epsilon = cfg.agent.epsilon;
    agent.epsilon_min = cfg.agent.epsilon_min;
    agent.epsilon_decay = cfg.agent.epsilon_decay;
    agent.learning_rate = cfg.agent.learning_rate;
    agent.discount = cfg.agent.discount;
    RewardConfig rc = cfg.reward;
    rc.k_min = cfg.agent.k_min;
    rc.k_max = cfg.agent.k_max;
    const TrainAgentResult res = train_agent(
        make_rate_evaluator(art, art.learned, cfg.agent.eval_images), cfg.agent.episodes,
        cfg.patch.slots(), rc, mix_seed(cfg.seed, 0xa9e7, 0), std::move(agent));
    save_json(path_in(cfg, "agent.json"), with_provenance(agent_to_json(res.agent), cfg));
    std::printf("agent: mean K bottom bin %.2f, top bin %.2f -> %s\n",
                mean_selected_k(res.agent, 0, 0),
                mean_selected_k(res.agent, res.agent.num_bins() - 1, res.agent.num_bins() - 1),
                path_in(cfg, "agent.json").c_str());
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
    const ExperimentReport rep = run_sweep(cfg);
    save_json(path_in(cfg, "report.json"), report_to_json(rep));
    write_text_file(path_in(cfg, "report.csv"), report_to_csv(rep));
    if (rep.failed) {
        std::fprintf(stderr, "sweep failed: %s\n", rep.failure.c_str());
        return 2;
    }
    render_plots(rep, cfg.out_dir);
    save_json(path_in(cfg, "agent.json"), with_provenance(agent_to_json(rep.agent), cfg));
    std::printf("sweep: %zu rows, S_w gray %.6g vs learned %.6g -> %s\n", rep.rows.size(),
                rep.vuln_gray.weighted_ssv, rep.vuln_learned.weighted_ssv,
                path_in(cfg, "report.csv").c_str());
    return 0;
}

int cmd_verify_theory(const ExperimentConfig& cfg) {
    const Artifacts art = build_artifacts(cfg);
    const TheoryOutcome out = verify_theory_checks(art.gray, art.learned, art.stats, cfg.theory,
                                                   mix_seed(cfg.seed, 0x7e0, 0));
    save_json(path_in(cfg, "theory.json"), theory_to_json(out));
    for (const auto& msg : out.messages) std::printf("%s\n", msg.c_str());
    if (!out.applicable) {
        std::printf("theory checks not applicable (delta or gamma is zero)\n");
        return 0;
    }
    std::printf("zeta* %.6g, KKT residual max %.6g (gray), projected gradient norm %.6g\n",
                out.kkt_gray.zeta_star, out.kkt_gray.kkt_residual_max,
                out.kkt_gray.projected_gradient_norm);
    std::printf("gap: empirical %.6g, bound %.6g (d_min %.4f, d_max %.4f)\n",
                out.gap.empirical_gap, out.gap.bound_value, out.gap.d_min, out.gap.d_max);
    return out.pass ? 0 : 1;
}

int cmd_plot(const ExperimentConfig& cfg) {
    const json j = load_json(path_in(cfg, "report.json"));
    const ExperimentReport rep = report_from_json(j);
    render_plots(rep, cfg.out_dir);
    std::printf("plots rendered to %s\n", cfg.out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"importance-aware M-QAM constellation toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    app.add_option("--config", config_path, "JSON config file");
    auto* seed_opt = app.add_option("--seed", seed_override, "master seed override");
    app.add_option("--out", out_override, "output directory override");

    auto* sc_ingest = app.add_subcommand("ingest", "parse the dataset and write normalized copies");
    auto* sc_codebook = app.add_subcommand("train-codebook", "learn the concept codebook");
    auto* sc_classifier = app.add_subcommand("train-classifier", "train the frozen task classifier");
    auto* sc_stats = app.add_subcommand("stats", "estimate SCI scores and source statistics");
    auto* sc_constellation =
        app.add_subcommand("train-constellation", "train the importance-aware constellation");
    auto* sc_rl = app.add_subcommand("rl-train", "train the adaptive rate controller");
    auto* sc_sweep = app.add_subcommand("sweep", "run the full SNR sweep and write reports");
    auto* sc_theory = app.add_subcommand("verify-theory", "run the suboptimality checks");
    auto* sc_plot = app.add_subcommand("plot", "re-render plots from a saved report");

    CLI11_PARSE(app, argc, argv);

    try {
        semqam::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = semqam::config_from_json(semqam::load_json(config_path));
        if (seed_opt->count() > 0) cfg.seed = seed_override;
        if (!out_override.empty()) cfg.out_dir = out_override;
        semqam::validate_config(cfg);
        std::filesystem::create_directories(cfg.out_dir);

        if (app.got_subcommand(sc_ingest)) return cmd_ingest(cfg);
        if (app.got_subcommand(sc_codebook)) return cmd_train_codebook(cfg);
        if (app.got_subcommand(sc_classifier)) return cmd_train_classifier(cfg);
        if (app.got_subcommand(sc_stats)) return cmd_stats(cfg);
        if (app.got_subcommand(sc_constellation)) return cmd_train_constellation(cfg);
        if (app.got_subcommand(sc_rl)) return cmd_rl_train(cfg);
        if (app.got_subcommand(sc_sweep)) return cmd_sweep(cfg);
        if (app.got_subcommand(sc_theory)) return cmd_verify_theory(cfg);
        if (app.got_subcommand(sc_plot)) return cmd_plot(cfg);
        std::fprintf(stderr, "no subcommand\n");
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
