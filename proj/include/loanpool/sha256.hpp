#pragma once

#include <string>
#include <string_view>

namespace loanpool {

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string& path);  // throws std::runtime_error on I/O failure

}  // namespace loanpool
