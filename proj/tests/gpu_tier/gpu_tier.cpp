// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

// Compares the reports of a full GPU run on the released data against the
// published headline numbers. Not part of ctest.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace {

struct Target {
    std::string name;
    double expected;
    double tolerance;
    double actual;
};

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return nlohmann::json::parse(in);
}

double zero_threshold_hit_rate(const nlohmann::json& sweep) {
    for (const auto& row : sweep) {
        if (row.at("threshold").get<double>() == 0.0) return row.at("el").at("hit_at_1").get<double>();
    }
    throw std::runtime_error("sweep.json has no row at threshold 0");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Check a full run's reports against the headline numbers"};
    std::filesystem::path reports;
    double point_tolerance = 0.015;
    double pearson_tolerance = 0.05;
    app.add_option("--reports", reports, "Directory holding metrics.json and sweep.json")->required();
    app.add_option("--tolerance", point_tolerance, "Absolute tolerance on F1/accuracy (fraction)");
    app.add_option("--pearson-tolerance", pearson_tolerance, "Absolute tolerance on Pearson r");
    CLI11_PARSE(app, argc, argv);

    std::vector<Target> targets;
    try {
        const auto metrics = read_json(reports / "metrics.json");
        const auto sweep = read_json(reports / "sweep.json");
        const auto& micro = metrics.at("micro");
        targets = {
            {"CTC micro F1", 0.962, point_tolerance, micro.at("ctc").at("micro").at("f1").get<double>()},
            {"inKB accuracy at threshold 0", 0.448, point_tolerance, zero_threshold_hit_rate(sweep)},
            {"outKB F1", 0.714, point_tolerance, micro.at("el").at("outkb").at("f1").get<double>()},
            {"inKB hit@1", 0.333, point_tolerance, micro.at("el").at("hit_at_1").get<double>()},
            {"EL accuracy", 0.576, point_tolerance, micro.at("el").at("accuracy").get<double>()},
        };
        const auto& r = metrics.at("pearson_oi_accuracy");
        targets.push_back({"Pearson r (O/I ratio, accuracy)", 0.87, pearson_tolerance,
                           r.is_null() ? std::nan("") : r.get<double>()});
    } catch (const std::exception& e) {
        std::cerr << "gpu tier: " << e.what() << "\n";
        return 2;
    }

    int failed = 0;
    for (const auto& t : targets) {
        const bool ok = std::abs(t.actual - t.expected) <= t.tolerance;
        failed += !ok;
        std::printf("%s  %-34s expected %.3f +- %.3f, got %.4f\n", ok ? "PASS" : "FAIL", t.name.c_str(), t.expected,
                    t.tolerance, t.actual);
    }
    std::printf("%zu of %zu targets met\n", targets.size() - static_cast<std::size_t>(failed), targets.size());
    return failed == 0 ? 0 : 1;
}
