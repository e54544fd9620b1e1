#pragma once

#include "mocp/core.hpp"

#include <iosfwd>
#include <string>

namespace mocp {

//! Dataset CSV: one header row, features named x0..x{p-1}, targets
//! y0..y{d-1}, any column order, '.' decimal separator.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);

void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);

} // namespace mocp
