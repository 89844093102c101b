#include "dsslat/curve_io.hpp"

#include <fstream>
#include <iomanip>

#include "dsslat/errors.hpp"

namespace dsslat {
namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << std::setprecision(12);
  return out;
}

}  // namespace

void write_workload_csv(const std::string& path, const WorkloadCurve& curve) {
  auto out = open_csv(path);
  out << "w,fbar\n";
  for (std::size_t m = 0; m < curve.values.size(); ++m)
    out << m * curve.step << ',' << curve.values[m] << '\n';
}

void write_response_csv(const std::string& path, const ResponseCurve& curve) {
  auto out = open_csv(path);
  out << "w,fbar_r\n";
  for (std::size_t m = 0; m < curve.values.size(); ++m)
    out << m * curve.step << ',' << curve.values[m] << '\n';
}

}  // namespace dsslat
