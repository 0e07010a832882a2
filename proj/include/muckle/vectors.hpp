#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "muckle/bytes.hpp"

namespace muckle {

/// Ordered `name = hex` entries. Blank lines and lines starting with '#'
/// are ignored when reading; names are unique.
class VectorFile {
public:
    void set(const std::string& name, ByteView value);
    bool contains(const std::string& name) const;
    /// Throws std::out_of_range for a missing name.
    const Bytes& at(const std::string& name) const;
    const std::vector<std::pair<std::string, Bytes>>& entries() const { return entries_; }

    void write(std::ostream& os) const;
    /// Throws std::invalid_argument on malformed lines or duplicate names.
    static VectorFile read(std::istream& is);

private:
    std::vector<std::pair<std::string, Bytes>> entries_;
};

}  // namespace muckle
