#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ctstokes/experiment.hpp"

using namespace ctstokes;

TEST_CASE("empty config produces the default experiment") {
    const ExperimentConfig config = parse_config_text("");
    CHECK(config.lambda == 10.0);
    CHECK(config.horizon == 3.0);
    CHECK(config.nx == 48);
    CHECK(config.ny == 48);
    CHECK(config.mu == 1.0);
    CHECK(config.include_linf_term);
    CHECK(config.dt_list == std::vector<double>{0.1, 0.05, 0.025, 0.0125, 0.00625});
    CHECK(config.rect.xmin == -1.0);
    CHECK(config.rect.xmax == 1.0);
}

TEST_CASE("config parsing and validation") {
    SUBCASE("comments, blank lines and overrides") {
        const ExperimentConfig config = parse_config_text(
            "# the second scenario\n"
            "lambda = 1\n"
            "T = 10\n"
            "dt_list = 0.1, 0.05, 0.025\n"
            "\n"
            "nx = 8  # small mesh\n"
            "ny = 8\n");
        CHECK(config.lambda == 1.0);
        CHECK(config.horizon == 10.0);
        CHECK(config.dt_list.size() == 3);
        CHECK(config.nx == 8);
    }

    SUBCASE("negative dt is rejected") {
        CHECK_THROWS_AS(parse_config_text("dt_list = -0.1\nT = 1\n"), ConfigError);
    }

    SUBCASE("T must be a multiple of dt") {
        CHECK_THROWS_AS(parse_config_text("T = 1\ndt_list = 0.3\n"), ConfigError);
    }

    SUBCASE("unknown keys are rejected with the key name") {
        try {
            parse_config_text("frobnicate = 2\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& err) {
            CHECK(std::string(err.what()).find("frobnicate") != std::string::npos);
        }
    }

    SUBCASE("zero mesh is rejected") {
        CHECK_THROWS_AS(parse_config_text("nx = 0\n"), ConfigError);
    }

    SUBCASE("lambda = 0 is allowed for the zero-data case") {
        CHECK(parse_config_text("lambda = 0\n").lambda == 0.0);
    }
}

TEST_CASE("run_experiment emits one row per checkpoint per dt") {
    ExperimentConfig config;
    config.nx = config.ny = 4;
    config.horizon = 0.4;
    config.dt_list = {0.1, 0.2};
    const std::vector<ResultRow> rows = run_experiment(config);
    CHECK(rows.size() == 4 + 2);
    CHECK(rows[0].dt == 0.1);
    CHECK(rows[3].t_checkpoint == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(rows[4].dt == 0.2);
    for (const auto& row : rows) {
        CHECK(row.error_total == row.error_grad_sq + row.error_dual_sq);
        CHECK(row.est2 >= 0.0);
        CHECK(std::isfinite(row.eff2));
    }
}

TEST_CASE("checkpoint stride keeps the final row") {
    ExperimentConfig config;
    config.nx = config.ny = 4;
    config.horizon = 0.5;
    config.dt_list = {0.1};
    config.checkpoint_stride = 2;
    const std::vector<ResultRow> rows = run_experiment(config);
    CHECK(rows.size() == 3);  // t = 0.2, 0.4 and the final 0.5
    CHECK(rows.back().t_checkpoint == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("zero-data run is exactly zero with flagged effectivity") {
    ExperimentConfig config;
    config.nx = config.ny = 4;
    config.lambda = 0.0;
    config.horizon = 0.3;
    config.dt_list = {0.1};
    const std::vector<ResultRow> rows = run_experiment(config);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
        CHECK(row.est1 == 0.0);
        CHECK(row.est2 == 0.0);
        CHECK(row.est3 == 0.0);
        CHECK(row.linf_term == 0.0);
        CHECK(row.error_total == 0.0);
        CHECK(std::isnan(row.eff2));
    }
}

TEST_CASE("csv output") {
    ExperimentConfig config;
    config.nx = config.ny = 4;
    config.horizon = 0.2;
    config.dt_list = {0.1};
    const std::vector<ResultRow> rows = run_experiment(config);

    SUBCASE("header names every field in order") {
        std::ostringstream os;
        write_csv(rows, os);
        std::istringstream in(os.str());
        std::string header;
        std::getline(in, header);
        CHECK(header ==
              "lambda,dt,T_checkpoint,est1,est2,est3,linf_term,error_grad_sq,error_dual_sq,error_total,data_osc,"
              "eff1,eff2,eff3,wallclock_seconds");
    }

    SUBCASE("empty row list gives a header-only file") {
        std::ostringstream os;
        write_csv({}, os);
        CHECK(os.str() == csv_header() + "\n");
    }

    SUBCASE("printed values round-trip and effectivities recompute exactly") {
        std::ostringstream os;
        write_csv(rows, os);
        std::istringstream in(os.str());
        std::string line;
        std::getline(in, line);  // header
        size_t row_index = 0;
        while (std::getline(in, line)) {
            std::stringstream fields(line);
            std::string item;
            std::vector<double> v;
            while (std::getline(fields, item, ',')) v.push_back(std::stod(item));
            REQUIRE(v.size() == 15);
            const double est2 = v[4], linf = v[6], error_total = v[9], eff2 = v[12];
            CHECK(std::abs(eff2 - (est2 + linf) / error_total) <= 1e-15 * std::abs(eff2));
            CHECK(v[2] == rows[row_index].t_checkpoint);  // 17 digits round-trip exactly
            ++row_index;
        }
        CHECK(row_index == rows.size());
    }

    SUBCASE("identical configs give byte-identical csv") {
        std::ostringstream first, second;
        write_csv(run_experiment(config), first);
        write_csv(run_experiment(config), second);
        CHECK(first.str() == second.str());
    }

    SUBCASE("gnuplot companion has two columns per block") {
        std::ostringstream os;
        write_gnuplot_eff2(rows, os);
        std::istringstream in(os.str());
        std::string line;
        int data_lines = 0;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream cols(line);
            std::string a, b, extra;
            CHECK((cols >> a >> b));
            CHECK_FALSE((cols >> extra));
            ++data_lines;
        }
        CHECK(data_lines == static_cast<int>(rows.size()));
    }
}

TEST_CASE("wallclock column is zero unless timing is enabled") {
    ExperimentConfig config;
    config.nx = config.ny = 4;
    config.horizon = 0.1;
    config.dt_list = {0.1};
    const std::vector<ResultRow> rows = run_experiment(config);
    CHECK(rows[0].wallclock_seconds == 0.0);
    config.timing = true;
    const std::vector<ResultRow> timed = run_experiment(config);
    CHECK(timed[0].wallclock_seconds > 0.0);
}
