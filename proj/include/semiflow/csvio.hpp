#ifndef SEMIFLOW_CSVIO_HPP
#define SEMIFLOW_CSVIO_HPP

#include <string>
#include <vector>

namespace semiflow {

// 17 significant digits: doubles round-trip exactly through this format.
std::string format_double(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    int column(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::string& path);

}  // namespace semiflow

#endif
