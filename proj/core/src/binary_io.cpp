#include "binary_io.hpp"

#include <vector>

namespace divhash::detail {

void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

void expect_magic(std::istream& in, std::string_view magic) {
  std::vector<char> buf(magic.size());
  if (!in.read(buf.data(), static_cast<std::streamsize>(buf.size())) ||
      std::string_view(buf.data(), buf.size()) != magic) {
    throw IoError("bad file header, expected " + std::string(magic));
  }
}

}  // namespace divhash::detail
