#pragma once

#include <string>

#include "dsslat/response.hpp"
#include "dsslat/workload.hpp"

namespace dsslat {

// CSV with header "w,fbar": workload survival on its uniform grid.
void write_workload_csv(const std::string& path, const WorkloadCurve& curve);

// CSV with header "w,fbar_r": response survival on its uniform grid.
void write_response_csv(const std::string& path, const ResponseCurve& curve);

}  // namespace dsslat
