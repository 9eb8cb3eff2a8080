#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hqe {

// RFC 4180: quoted fields, doubled quotes, CRLF-tolerant.  An empty
// unquoted field reads back as an empty string; NULL mapping is the
// caller's concern.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::string csv_line(const std::vector<std::string>& fields);

std::string sha256_hex(const std::string& data);

std::string lower(std::string s);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace hqe
