#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "sensorprep/error.hpp"
#include "sensorprep/ingest.hpp"
#include "support.hpp"

using namespace sensorprep;
using testing_support::dataset;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::Io;
}

} // namespace

TEST(Csv, ParsesHeaderAndTimestamps) {
    std::istringstream in("\xEF\xBB\xBFtimestamp, a ,b\r\n0,1.5,2\r\n60,-3e2,+4\r\n\n");
    const auto d = parse_csv(in, "mem");
    EXPECT_EQ(d.node_ids(), (std::vector<std::string>{"a", "b"}));
    ASSERT_TRUE(d.timestamps());
    EXPECT_EQ(*d.timestamps(), (std::vector<std::int64_t>{0, 60}));
    EXPECT_DOUBLE_EQ(d.values()(1, 0), -300.0);
    EXPECT_DOUBLE_EQ(d.values()(1, 1), 4.0);
}

TEST(Csv, WithoutTimestampColumn) {
    std::istringstream in("x,y\n1,2\n3,4\n");
    const auto d = parse_csv(in);
    EXPECT_FALSE(d.timestamps());
    EXPECT_EQ(d.rows(), 2u);
}

TEST(Csv, NonNumericCellNamesRowAndColumn) {
    std::istringstream in("a,b\n1,2\n3,abc\n");
    try {
        parse_csv(in, "f.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Parse);
        EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("\"b\""), std::string::npos);
    }
}

TEST(Csv, Rejections) {
    const auto parse = [](const char* text) {
        return code_of([&] {
            std::istringstream in(text);
            parse_csv(in);
        });
    };
    EXPECT_EQ(parse(""), ErrorCode::Parse);
    EXPECT_EQ(parse("a,b\n1,2\n"), ErrorCode::Parse);          // one row
    EXPECT_EQ(parse("a,a\n1,2\n3,4\n"), ErrorCode::Parse);     // duplicate id
    EXPECT_EQ(parse("a,b\n1,2\n3\n"), ErrorCode::Parse);       // ragged
    EXPECT_EQ(parse("a,b\n1,2\n3,nan\n"), ErrorCode::Parse);   // non-finite
    EXPECT_EQ(parse("a,b\n1,2\n3,1e999\n"), ErrorCode::Parse); // overflow
    EXPECT_EQ(parse("timestamp,a\n5,1\n5,2\n"), ErrorCode::Parse);
}

TEST(Csv, RoundTripIsExact) {
    std::mt19937_64 rng(7);
    const auto d = testing_support::random_dataset(rng, 20, 4);
    std::ostringstream out;
    write_csv(out, d);
    std::istringstream in(out.str());
    EXPECT_EQ(parse_csv(in), d);
}

TEST(Schema, FirstMismatchIsNamed) {
    const std::vector<std::string> model{"a", "b", "c"};
    const std::vector<std::string> data{"a", "x", "c"};
    try {
        require_same_nodes(model, data);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SchemaMismatch);
        EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos);
    }
    EXPECT_NO_THROW(require_same_nodes(model, model));
}

TEST(Standardize, TwoSampleExample) {
    const auto s = standardize(dataset({{1.0, 3.0}}));
    EXPECT_DOUBLE_EQ(s.standardization.means[0], 2.0);
    EXPECT_DOUBLE_EQ(s.standardization.variances[0], 2.0);
    EXPECT_NEAR(s.values(0, 0), -1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s.values(1, 0), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Standardize, ConstantColumnNamesNode) {
    try {
        standardize(dataset({{1.0, 2.0, 3.0}, {5.0, 5.0, 5.0}}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroVariance);
        EXPECT_NE(std::string(e.what()).find("n1"), std::string::npos);
    }
}

TEST(Standardize, MomentsOnRandomData) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = testing_support::random_dataset(rng, 3 + rng() % 200, 1 + rng() % 10);
        const auto s = standardize(d);
        for (std::size_t c = 0; c < d.nodes(); ++c) {
            const auto col = s.values.column(c);
            double mean = 0.0, ss = 0.0;
            for (const double x : col) mean += x;
            mean /= static_cast<double>(col.size());
            for (const double x : col) ss += (x - mean) * (x - mean);
            EXPECT_LT(std::abs(mean), 1e-9);
            EXPECT_LT(std::abs(ss / static_cast<double>(col.size() - 1) - 1.0), 1e-9);
        }
    }
}

TEST(Standardize, AffineInvariance) {
    std::mt19937_64 rng(3);
    const auto d = testing_support::random_dataset(rng, 50, 3);
    Matrix shifted = d.values();
    for (std::size_t r = 0; r < shifted.rows(); ++r)
        for (std::size_t c = 0; c < shifted.cols(); ++c) shifted(r, c) = 4.5 * shifted(r, c) - 17.0;
    const auto a = standardize(d);
    const auto b = standardize(SensorDataset(shifted, d.node_ids()));
    EXPECT_LT(max_abs_diff(a.values, b.values), 1e-12);
}

TEST(Discretize, EqualWidthBinsAndEdgeRule) {
    const auto d = dataset({{0.0, 1.0, 2.0, 3.0, 4.0, 6.0}});
    const auto scheme = fit_discretization(d, 3);
    EXPECT_EQ(scheme.edges(0), (std::vector<double>{2.0, 4.0}));
    const auto s = discretize(d, scheme);
    EXPECT_EQ(s.column(0), (std::vector<State>{1, 1, 2, 2, 3, 3}));
    // Edge values fall in the higher bin; out-of-range values clamp.
    EXPECT_EQ(scheme.state_of(0, 2.0), 2);
    EXPECT_EQ(scheme.state_of(0, -50.0), 1);
    EXPECT_EQ(scheme.state_of(0, 99.0), 3);
}

TEST(Discretize, MonotoneAndInRange) {
    std::mt19937_64 rng(5);
    const auto d = testing_support::random_dataset(rng, 100, 3);
    for (int k = 2; k <= 6; ++k) {
        const auto scheme = fit_discretization(d, k);
        for (std::size_t c = 0; c < 3; ++c) {
            State last = 1;
            for (double x = -400.0; x <= 400.0; x += 0.37) {
                const State s = scheme.state_of(c, x);
                EXPECT_GE(s, last);
                EXPECT_GE(s, 1);
                EXPECT_LE(s, k);
                last = s;
            }
        }
    }
}

TEST(Discretize, Rejections) {
    EXPECT_EQ(code_of([] { fit_discretization(dataset({{1.0, 1.0}}), 3); }), ErrorCode::Degenerate);
    EXPECT_EQ(code_of([] { fit_discretization(dataset({{1.0, 2.0}}), 1); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { DiscretizationScheme({{2.0, 1.0}}, 3); }), ErrorCode::InvalidArgument);
}

TEST(Inject, AddsScaledTrainingMean) {
    const auto d = dataset({{1.0, 2.0, 3.0}, {10.0, 20.0, 30.0}});
    const std::vector<double> means{2.0, 20.0};
    const std::vector<std::size_t> rows{2};
    const auto out = inject_errors(d, rows, 0.1, means);
    EXPECT_DOUBLE_EQ(out.values()(2, 0), 3.2);
    EXPECT_DOUBLE_EQ(out.values()(2, 1), 32.0);
    EXPECT_EQ(out.values()(0, 0), 1.0);
    EXPECT_EQ(inject_errors(d, rows, 0.0, means), d);
}

TEST(Inject, Rejections) {
    const auto d = dataset({{1.0, 2.0}});
    const std::vector<double> means{1.5};
    EXPECT_EQ(code_of([&] { inject_errors(d, std::vector<std::size_t>{}, 0.1, means); }),
              ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { inject_errors(d, std::vector<std::size_t>{5}, 0.1, means); }),
              ErrorCode::InvalidArgument);
    EXPECT_EQ(last_rows(5, 2), (std::vector<std::size_t>{3, 4}));
}
