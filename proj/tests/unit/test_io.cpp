#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

#include "nlwlab/gff.hpp"
#include "nlwlab/io.hpp"

using namespace nlw;

namespace {
std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / "nlwlab_io_test" / name).string();
}
}  // namespace

TEST(Io, FieldSnapshotRoundTripIsExact) {
    for (int d : {1, 2}) {
        const auto p = sample_gff(Lattice(d, 5), 17);
        const auto path = tmp_path("pair" + std::to_string(d) + ".json");
        write_json(path, to_json(p));
        const auto q = pair_from_json(read_json(path));
        ASSERT_EQ(q.pos.lattice(), p.pos.lattice());
        EXPECT_EQ(max_abs_diff(q.pos, p.pos), 0.0);
        EXPECT_EQ(max_abs_diff(q.vel, p.vel), 0.0);
    }
}

TEST(Io, SnapshotListsOnlyNonzeroModes) {
    const Lattice lat(2, 3);
    SpectralField f(lat);
    f[lat.index({1, 0})] = cplx(0.5, 0.25);
    f[lat.index({-1, 0})] = cplx(0.5, -0.25);
    const auto j = to_json(f);
    EXPECT_EQ(j["schema"], "nlwlab.field/1");
    EXPECT_EQ(j["d"], 2);
    EXPECT_EQ(j["M"], 3);
    ASSERT_EQ(j["modes"].size(), 2u);
    EXPECT_EQ(j["modes"][0].size(), 4u);
}

TEST(Io, SnapshotRejectsBadRecords) {
    const auto good = to_json(sample_gff(Lattice(2, 2), 1).pos);
    auto wrong_schema = good;
    wrong_schema["schema"] = "nlwlab.field/2";
    EXPECT_THROW(field_from_json(wrong_schema), ConfigError);

    auto outside = good;
    outside["modes"].push_back(json::array({7, 0, 1.0, 0.0}));
    EXPECT_THROW(field_from_json(outside), ConfigError);

    auto one_sided = json{{"schema", "nlwlab.field/1"}, {"d", 2}, {"M", 2}, {"modes", json::array()}};
    one_sided["modes"].push_back(json::array({1, 0, 1.0, 1.0}));
    EXPECT_THROW(field_from_json(one_sided), ConfigError);

    auto short_record = good;
    short_record["modes"].push_back(json::array({1, 0.0}));
    EXPECT_THROW(field_from_json(short_record), ConfigError);

    EXPECT_THROW(pair_from_json(good), ConfigError);
    EXPECT_THROW(read_json(tmp_path("does_not_exist.json")), ConfigError);
}

TEST(Io, CsvSchemaLineAndColumns) {
    const auto text = csv_with_schema(schema::convergence, convergence_csv_header() + "\n1,tent,0.1,0.5,0,0,0\n");
    EXPECT_EQ(text.rfind("# schema=nlwlab.convergence/1\n", 0), 0u);
    const std::vector<std::string> want{"seed", "kernel", "delta", "T", "sup_distance", "t", "distance"};
    EXPECT_EQ(csv_columns(text), want);

    const auto ladder = csv_columns(inflation_ladder_header());
    for (const char* c : {"N", "phi_Hs", "u_T_Hs", "margin_i", "margin_vi", "growth_monotone", "gap_median"})
        EXPECT_NE(std::find(ladder.begin(), ladder.end(), c), ladder.end()) << c;
    EXPECT_EQ(csv_columns(tree_terms_header()), (std::vector<std::string>{"j", "t", "FL1", "Hs", "order"}));
}

TEST(Io, LadderRowMatchesHeaderWidth) {
    InflationReport r;
    r.plan = plan_at(2, -1.2, 16, PlanOptions{0.1});
    const auto row = inflation_ladder_row(r, 1.5, 0.75, true);
    EXPECT_EQ(csv_columns(row).size(), csv_columns(inflation_ladder_header()).size());
    EXPECT_EQ(row.back(), '\n');
}

TEST(Io, CsvNumberRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(csv_number(v)), v);
}

TEST(Io, SerializationIsDeterministic) {
    const auto p = sample_gff(Lattice(2, 4), 9);
    EXPECT_EQ(to_json(p).dump(2), to_json(sample_gff(Lattice(2, 4), 9)).dump(2));
    const auto plan = plan_at(2, -1.2, 32, PlanOptions{0.1});
    const auto a = to_json(plan).dump(), b = to_json(plan_at(2, -1.2, 32, PlanOptions{0.1})).dump();
    EXPECT_EQ(a, b);
    const auto js = to_json(plan);
    EXPECT_EQ(js["schema"], "nlwlab.inflation-plan/1");
    EXPECT_EQ(js["conditions"].size(), 6u);
    EXPECT_EQ(js["conditions"][0]["id"], "i");
}

TEST(Io, ManifestCarriesSchemaConfigAndOutputs) {
    const auto m = manifest("inflate", json{{"d", 2}}, {"inflate.csv"});
    EXPECT_EQ(m["schema"], "nlwlab.manifest/1");
    EXPECT_EQ(m["subcommand"], "inflate");
    EXPECT_EQ(m["config"]["d"], 2);
    EXPECT_EQ(m["outputs"][0], "inflate.csv");
    EXPECT_FALSE(m.contains("timestamp"));
}

TEST(Io, WriteTextCreatesDirectories) {
    const auto path = tmp_path("nested/deeper/x.txt");
    std::filesystem::remove_all(tmp_path("nested"));
    write_text(path, "abc");
    EXPECT_EQ(read_text(path), "abc");
}
