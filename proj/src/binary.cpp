#include "rte/binary.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "rte/error.hpp"

namespace rte {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::vector<std::uint8_t> out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path);
  return out;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on " + path);
}

void write_text_file(const std::string& path, const std::string& text) {
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string read_text_file(const std::string& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void BinaryReader::need(std::size_t n, const char* field) const {
  if (data_.size() - pos_ < n) {
    std::ostringstream os;
    os << source_ << ": truncated at byte " << pos_ << " while reading " << field << " (need " << n << ", have "
       << data_.size() - pos_ << ")";
    throw FormatError(os.str());
  }
}

std::string BinaryReader::str(const char* field, std::size_t max_len) {
  const std::uint32_t n = u32(field);
  if (n > max_len) fail(std::string(field) + " length " + std::to_string(n) + " exceeds limit");
  std::string s(n, '\0');
  bytes(s.data(), n, field);
  return s;
}

void BinaryReader::fail(const std::string& what) const {
  std::ostringstream os;
  os << source_ << ": " << what << " (byte " << pos_ << ")";
  throw FormatError(os.str());
}

}  // namespace rte
