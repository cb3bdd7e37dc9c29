#include <unistd.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ipss/dataio.hpp"
#include "ipss/rng.hpp"

using namespace ipss;

namespace {

struct TempFile {
    std::filesystem::path path;

    explicit TempFile(const std::string& content) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("ipss_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".csv");
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::filesystem::remove(path); }

    std::string str() const { return path.string(); }
};

Dataset tiny_dataset() {
    Dataset d;
    d.feature_names = {"a", "b"};
    d.columns = {{1.0, 2.0, 3.0, 4.0}, {0.5, -0.5, 1.5, -1.5}};
    d.response.kind = ResponseKind::continuous;
    d.response.values = {10.0, 20.0, 30.0, 40.0};
    return d;
}

}  // namespace

TEST_CASE("load_csv reads values and picks the response column by name") {
    TempFile f("a,b,y\n1,4,0.5\n2,5,1.5\n3,6,2.5\n4,7,3.5\n");
    Dataset d = load_csv(f.str(), {ResponseSource::column, "y"});
    CHECK(d.n() == 4);
    CHECK(d.p() == 2);
    CHECK(d.feature_names == std::vector<std::string>({"a", "b"}));
    CHECK(d.columns[0] == std::vector<double>({1, 2, 3, 4}));
    CHECK(d.columns[1] == std::vector<double>({4, 5, 6, 7}));
    CHECK(d.response.values == std::vector<double>({0.5, 1.5, 2.5, 3.5}));
    CHECK(d.response.kind == ResponseKind::continuous);
    CHECK(d.dropped_rows == 0);
}

TEST_CASE("response column can sit anywhere in the header") {
    TempFile f("y,a,b\n0,1,4\n1,2,5\n2,3,6\n3,4,7\n");
    Dataset d = load_csv(f.str(), {ResponseSource::column, "y"});
    CHECK(d.feature_names == std::vector<std::string>({"a", "b"}));
    CHECK(d.columns[0] == std::vector<double>({1, 2, 3, 4}));
    CHECK(d.response.values == std::vector<double>({0, 1, 2, 3}));
}

TEST_CASE("missing response column is an error") {
    TempFile f("a,b\n1,2\n3,4\n5,6\n7,8\n");
    CHECK_THROWS_WITH_AS(load_csv(f.str(), {ResponseSource::column, "z"}),
                         doctest::Contains("response column not found"), std::runtime_error);
}

TEST_CASE("incomplete rows are dropped and counted") {
    TempFile f("a,b,y\n1,4,0\n,5,1\n3,abc,2\n4,7,3\n5,8,4\n6,9,5\n");
    Dataset d = load_csv(f.str(), {ResponseSource::column, "y"});
    CHECK(d.n() == 4);
    CHECK(d.dropped_rows == 2);
    CHECK(d.columns[0] == std::vector<double>({1, 4, 5, 6}));
}

TEST_CASE("wrong field count is a hard error, not a dropped row") {
    TempFile f("a,b,y\n1,4,0\n2,5\n3,6,2\n4,7,3\n");
    CHECK_THROWS_WITH_AS(load_csv(f.str(), {ResponseSource::column, "y"}),
                         doctest::Contains("malformed CSV row 2"), std::runtime_error);
}

TEST_CASE("fewer than 4 complete rows is an error") {
    TempFile f("a,y\n1,0\n2,1\n3,2\n");
    CHECK_THROWS_WITH_AS(load_csv(f.str(), {ResponseSource::column, "y"}),
                         doctest::Contains("too few samples"), std::runtime_error);
}

TEST_CASE("response can come from a separate single-column file") {
    TempFile data("a,b\n1,4\n2,5\n3,6\n4,7\n");
    TempFile resp("outcome\n0.5\n1.5\n2.5\n3.5\n");
    Dataset d = load_csv(data.str(), {ResponseSource::file, resp.str()});
    CHECK(d.response_name == "outcome");
    CHECK(d.response.values == std::vector<double>({0.5, 1.5, 2.5, 3.5}));
    CHECK(d.p() == 2);

    SUBCASE("row count mismatch is an error") {
        TempFile shorter("0.5\n1.5\n2.5\n");
        CHECK_THROWS_WITH_AS(load_csv(data.str(), {ResponseSource::file, shorter.str()}),
                             doctest::Contains("row count"), std::runtime_error);
    }
}

TEST_CASE("a missing response cell drops that row") {
    TempFile data("a\n1\n2\n3\n4\n5\n");
    TempFile resp("0\n1\n\n3\n4\n");
    Dataset d = load_csv(data.str(), {ResponseSource::file, resp.str()});
    CHECK(d.n() == 4);
    CHECK(d.dropped_rows == 1);
    CHECK(d.columns[0] == std::vector<double>({1, 2, 4, 5}));
}

TEST_CASE("binary responses map the larger value to 1") {
    TempFile f("a,y\n1,2\n2,5\n3,2\n4,5\n");

    SUBCASE("auto detection sees two distinct values") {
        Dataset d = load_csv(f.str(), {ResponseSource::column, "y"});
        CHECK(d.response.kind == ResponseKind::binary);
        CHECK(d.response.values == std::vector<double>({0, 1, 0, 1}));
    }
    SUBCASE("explicit binary works the same") {
        Dataset d = load_csv(f.str(), {ResponseSource::column, "y"}, ResponseKindOption::binary);
        CHECK(d.response.values == std::vector<double>({0, 1, 0, 1}));
    }
    SUBCASE("explicit continuous keeps the raw values") {
        Dataset d = load_csv(f.str(), {ResponseSource::column, "y"}, ResponseKindOption::continuous);
        CHECK(d.response.kind == ResponseKind::continuous);
        CHECK(d.response.values == std::vector<double>({2, 5, 2, 5}));
    }
}

TEST_CASE("explicit binary with the wrong number of classes is an error") {
    TempFile three("a,y\n1,0\n2,1\n3,2\n4,0\n");
    CHECK_THROWS_WITH_AS(load_csv(three.str(), {ResponseSource::column, "y"}, ResponseKindOption::binary),
                         doctest::Contains("exactly 2 distinct"), std::runtime_error);
    TempFile one("a,y\n1,3\n2,3\n3,3\n4,3\n");
    CHECK_THROWS_AS(load_csv(one.str(), {ResponseSource::column, "y"}, ResponseKindOption::binary),
                    std::runtime_error);
}

TEST_CASE("write_csv then load_csv round-trips content exactly") {
    Dataset d = tiny_dataset();
    // Values chosen to stress shortest-round-trip formatting.
    d.columns[0] = {0.1, 1.0 / 3.0, 1e-8, -2.5e300};
    d.columns[1] = {1e16 + 2, -0.0, 5e-324, 123456789.123456789};

    TempFile f("");
    write_csv(d, f.str());
    Dataset back = load_csv(f.str(), {ResponseSource::column, "y"}, ResponseKindOption::continuous);
    CHECK(content_equal(back, d));
}

TEST_CASE("subset_rows and subset_columns pick exactly what was asked") {
    Dataset d = tiny_dataset();
    std::vector<std::size_t> rows{0, 2};
    Dataset r = d.subset_rows(rows);
    CHECK(r.n() == 2);
    CHECK(r.columns[0] == std::vector<double>({1.0, 3.0}));
    CHECK(r.response.values == std::vector<double>({10.0, 30.0}));

    std::vector<std::size_t> cols{1};
    Dataset c = d.subset_columns(cols);
    CHECK(c.p() == 1);
    CHECK(c.feature_names == std::vector<std::string>({"b"}));
    CHECK(c.columns[0] == d.columns[1]);
    CHECK(c.response.values == d.response.values);
}

TEST_CASE("validate rejects inconsistent datasets") {
    Dataset d = tiny_dataset();
    SUBCASE("ragged columns") {
        d.columns[1].pop_back();
        CHECK_THROWS_AS(d.validate(), std::runtime_error);
    }
    SUBCASE("non-finite feature") {
        d.columns[0][1] = std::nan("");
        CHECK_THROWS_AS(d.validate(), std::runtime_error);
    }
    SUBCASE("bad binary labels") {
        d.response.kind = ResponseKind::binary;
        d.response.values = {0, 1, 0.5, 1};
        CHECK_THROWS_AS(d.validate(), std::runtime_error);
    }
    SUBCASE("response length mismatch") {
        d.response.values.pop_back();
        CHECK_THROWS_AS(d.validate(), std::runtime_error);
    }
}

TEST_CASE("standardize_columns centers and scales with divisor n") {
    Dataset d = tiny_dataset();
    d.columns = {{1.0, 3.0, 1.0, 3.0}, {7.0, 7.0, 7.0, 7.0}};
    auto [out, report] = standardize_columns(d);

    CHECK(out.columns[0] == std::vector<double>({-1.0, 1.0, -1.0, 1.0}));
    CHECK(report.means[0] == 2.0);
    CHECK(report.sds[0] == 1.0);

    // Constant column: zeroed and reported.
    CHECK(out.columns[1] == std::vector<double>({0, 0, 0, 0}));
    CHECK(report.sds[1] == 0.0);
    CHECK(report.constant_columns == std::vector<std::size_t>({1}));

    SUBCASE("idempotent on already standardized data") {
        auto [again, report2] = standardize_columns(out);
        CHECK(again.columns[0] == out.columns[0]);
        CHECK(report2.constant_columns == std::vector<std::size_t>({1}));
    }
}

TEST_CASE("standardized random columns have mean 0 and variance 1") {
    Rng rng(99);
    Dataset d;
    d.feature_names = {"a", "b", "c"};
    d.columns.assign(3, std::vector<double>(50));
    for (auto& col : d.columns)
        for (double& v : col) v = rng.uniform(-5.0, 5.0);
    d.response.values.assign(50, 0.0);

    auto [out, report] = standardize_columns(d);
    for (const auto& col : out.columns) {
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= static_cast<double>(col.size());
        double var = 0.0;
        for (double v : col) var += (v - mean) * (v - mean);
        var /= static_cast<double>(col.size());
        CHECK(std::abs(mean) < 1e-12);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(report.constant_columns.empty());
}

TEST_CASE("format_double round-trips through parsing") {
    for (double x : {0.0, -0.0, 0.1, 1.0 / 3.0, 1e-8, -2.5e300, 5e-324, 1e16 + 2.0}) {
        const std::string s = format_double(x);
        double back = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), back);
        REQUIRE(ec == std::errc{});
        REQUIRE(ptr == s.data() + s.size());
        CHECK(back == x);
    }
}

TEST_CASE("load_matrix_csv reads a features-only file") {
    TempFile f("u,v\n1,2\n3,4\n5,x\n7,8\n9,10\n");
    FeatureMatrix m = load_matrix_csv(f.str());
    CHECK(m.p() == 2);
    CHECK(m.n() == 4);
    CHECK(m.dropped_rows == 1);
    CHECK(m.names == std::vector<std::string>({"u", "v"}));
    CHECK(m.columns[0] == std::vector<double>({1, 3, 7, 9}));
}
