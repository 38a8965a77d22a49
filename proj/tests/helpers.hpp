#pragma once
// shared bits for the test suites

#include <fstream>
#include <sstream>
#include <string>

#include "acirc/circuit.hpp"

inline std::string testdata_path(const std::string& name) {
    return std::string(ACIRC_TESTDATA) + "/" + name;
}

inline std::string slurp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw acirc::parse_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline acirc::Circuit load_testdata(const std::string& name) {
    return acirc::circuit_load(slurp_file(testdata_path(name)));
}
