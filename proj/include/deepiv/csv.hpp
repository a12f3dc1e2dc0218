#pragma once

#include <string>
#include <string_view>

#include "deepiv/dataset.hpp"

namespace deepiv {

// Shortest decimal string that round-trips to the same double
// (std::to_chars). Non-finite values print as "inf", "-inf", "nan".
std::string format_double(double v);

// Strict parse of a whole field as a double; throws DomainError on
// empty fields, trailing junk, or non-finite values.
double parse_double_field(std::string_view field, std::size_t line_no, std::size_t col_no);

// Dataset CSV schema: header "y,x1..xq,z1..zd[,r1..rm]", '.' decimal,
// no missing values. Column blocks must appear in that order with
// consecutive indices starting at 1.
Dataset parse_dataset_csv(std::string_view text);
Dataset read_dataset_csv(const std::string& path);

std::string dataset_to_csv(const Dataset& data);
void write_text_file(const std::string& path, std::string_view text);
std::string read_text_file(const std::string& path);

}  // namespace deepiv
