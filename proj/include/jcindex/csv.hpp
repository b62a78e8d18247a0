#pragma once

#include <iosfwd>
#include <string>

#include "jcindex/core.hpp"

namespace jcindex {

// CSV layout: header `id,time,event,<cov1>,...,<covd>`; event is an integer
// code with 0 = censored. Empty fields and NA/NaN in covariate columns are
// treated as missing and rejected during validation.
Dataset read_csv(std::istream& in, const ValidateOptions& options = {});
Dataset read_csv_file(const std::string& path, const ValidateOptions& options = {});

// Numbers are written in shortest round-trip form.
void write_csv(std::ostream& out, const Dataset& ds);
void write_csv_file(const std::string& path, const Dataset& ds);

std::string format_double(double v);

}  // namespace jcindex
