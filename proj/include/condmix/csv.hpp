#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "condmix/dataset.hpp"

namespace condmix {

// Canonical float formatting: shortest decimal string that round-trips the
// exact double. All files the tool writes use this, so byte equality of
// outputs is meaningful.
std::string format_double(double value);

RawTable parse_csv(std::string_view text);
RawTable read_csv(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Rows of already-formatted cells; comments are emitted first as '# ...' lines.
std::string table_to_csv(const std::vector<std::string>& comments,
                         const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

std::string dataset_to_csv(const Dataset& data, const std::vector<std::string>& comments,
                           bool include_y, const std::string& response_name = "y");

}  // namespace condmix
