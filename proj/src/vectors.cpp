#include "muckle/vectors.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace muckle {

namespace {
std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}
}  // namespace

void VectorFile::set(const std::string& name, ByteView value) {
    for (auto& [n, v] : entries_) {
        if (n == name) {
            v.assign(value.begin(), value.end());
            return;
        }
    }
    entries_.emplace_back(name, Bytes(value.begin(), value.end()));
}

bool VectorFile::contains(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.first == name) return true;
    return false;
}

const Bytes& VectorFile::at(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.first == name) return e.second;
    throw std::out_of_range("vector file has no entry '" + name + "'");
}

void VectorFile::write(std::ostream& os) const {
    for (const auto& [name, value] : entries_) os << name << " = " << to_hex(value) << '\n';
}

VectorFile VectorFile::read(std::istream& is) {
    VectorFile vf;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("vector file line " + std::to_string(lineno) + ": missing '='");
        auto name = trim(t.substr(0, eq));
        auto hex = trim(t.substr(eq + 1));
        if (name.empty()) throw std::invalid_argument("vector file line " + std::to_string(lineno) + ": empty name");
        if (vf.contains(name))
            throw std::invalid_argument("vector file line " + std::to_string(lineno) + ": duplicate '" + name + "'");
        vf.entries_.emplace_back(name, from_hex(hex));
    }
    return vf;
}

}  // namespace muckle
