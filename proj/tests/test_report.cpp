#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "lpshrink/report.hpp"
#include "lpshrink/rng.hpp"

using namespace lpshrink;

TEST_CASE("format_double round-trips bit-exactly") {
  StreamRng rng(3, 0);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.next_normal() * std::pow(10.0, static_cast<double>(
                                                            static_cast<int>(rng.next_u64() % 61) - 30));
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.4) == "0.4");
  CHECK(format_double(5.0) == "5");
}

TEST_CASE("report row column layout") {
  CHECK(report_csv_header() ==
        "d,p,alpha,phi,scale_mode,n,theta_norm,reps,seed,risk_mean,risk_stderr,sure_mean,"
        "zeroed_fraction");

  ReportRow row;
  row.d = 5;
  row.p = "2";
  row.alpha = 0.3;
  row.phi = "constant:3";
  row.scale_mode = "known";
  row.theta_norm = 1.5;
  row.reps = 1000;
  row.seed = 7;
  row.risk_mean = 4.25;
  row.risk_stderr = 0.03125;
  CHECK(to_csv(row) == "5,2,0.3,constant:3,known,,1.5,1000,7,4.25,0.03125,,");

  row.n = 6;
  row.scale_mode = "unknown";
  row.sure_mean = 4.5;
  row.zeroed_fraction = 0.25;
  CHECK(to_csv(row) == "5,2,0.3,constant:3,unknown,6,1.5,1000,7,4.25,0.03125,4.5,0.25");
}

TEST_CASE("risk curve svg has frame, reference line and markers") {
  std::vector<ReportRow> rows(3);
  rows[0].theta_norm = 0.0;
  rows[0].risk_mean = 2.0;
  rows[1].theta_norm = 5.0;
  rows[1].risk_mean = 4.1;
  rows[2].theta_norm = 20.0;
  rows[2].risk_mean = 4.9;
  const std::string svg = render_risk_curve_svg(rows, 5.0);
  CHECK(svg.find("viewBox=\"0 0 800 600\"") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);
  CHECK(svg.find("theta_norm") != std::string::npos);
  CHECK(svg.find("risk_mean") != std::string::npos);
  std::size_t circles = 0;
  for (std::size_t pos = svg.find("<circle"); pos != std::string::npos;
       pos = svg.find("<circle", pos + 1)) {
    ++circles;
  }
  CHECK(circles == rows.size());
  // deterministic output
  CHECK(render_risk_curve_svg(rows, 5.0) == svg);
}
