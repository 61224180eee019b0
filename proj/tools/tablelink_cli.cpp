// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tablelink/errors.hpp"
#include "tablelink/pipeline.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> work_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> threshold;
    std::optional<std::size_t> k;
    std::optional<std::string> backend;
    std::vector<std::string> folds;
};

void add_options(CLI::App& cmd, Overrides& o) {
    cmd.add_option("--config", o.config, "Pipeline config (JSON)")->required();
    cmd.add_option("--work-dir", o.work_dir, "Override the artifact directory");
    cmd.add_option("--seed", o.seed, "Override the global seed");
    cmd.add_option("--threshold", o.threshold, "Override the inKB threshold");
    cmd.add_option("--k", o.k, "Override the candidate set size");
    cmd.add_option("--backend", o.backend, "Override the encoder backend name");
    cmd.add_option("--fold", o.folds, "Restrict to these test topics (repeatable)");
}

std::string describe(tablelink::Stage stage) {
    using tablelink::Stage;
    switch (stage) {
        case Stage::ingest_kb: return "Validate the KB dump and copy it into the work directory";
        case Stage::ingest_corpus: return "Validate the annotated corpus and copy it into the work directory";
        case Stage::train_ctc: return "Train the cell type classifier for each fold";
        case Stage::train_asm: return "Train the attributed source matcher for each fold";
        case Stage::train_dr: return "Train the dense retrieval bi-encoder for each fold";
        case Stage::train_ed: return "Train the entity disambiguation cross-encoder for each fold";
        case Stage::predict: return "Run the full linking chain on each fold's test cells";
        case Stage::evaluate: return "Score predictions against gold labels";
        case Stage::sweep: return "Re-evaluate entity linking over a grid of inKB thresholds";
    }
    return "";
}

tablelink::PipelineConfig resolve_config(const Overrides& o) {
    auto config = tablelink::load_pipeline_config(o.config);
    if (o.work_dir) config.work_dir = *o.work_dir;
    if (o.seed) config.seed = *o.seed;
    if (o.threshold) config.threshold = *o.threshold;
    if (o.k) config.k = *o.k;
    if (o.backend) config.backend.name = *o.backend;
    if (!o.folds.empty()) config.only_folds = o.folds;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entity linking for scientific result tables"};
    app.require_subcommand(1);

    Overrides overrides;
    std::optional<tablelink::Stage> chosen;
    for (auto stage : tablelink::kStages) {
        auto* cmd = app.add_subcommand(std::string(tablelink::to_string(stage)), describe(stage));
        add_options(*cmd, overrides);
        cmd->callback([&chosen, stage] { chosen = stage; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        run_stage(*chosen, resolve_config(overrides), std::cout);
    } catch (const std::exception& e) {
        std::cerr << "tablelink " << tablelink::to_string(*chosen) << ": " << e.what() << "\n";
        return tablelink::exit_code_for(e);
    }
    return 0;
}
