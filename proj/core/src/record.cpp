#include "dopt/record.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "dopt/error.hpp"

namespace dopt {

void write_csv(const RunRecord& record, std::ostream& out) {
  out << "# fingerprint=" << record.fingerprint << '\n';
  out << "# algorithm=" << record.algorithm << '\n';
  out << "# seed=" << record.seed << '\n';
  out << "# truncated=" << (record.truncated ? 1 : 0) << '\n';
  out << "# output_iter=" << record.output_iter << '\n';
  out << fmt::format("# output_grad_norm_sq={:.17g}\n", record.output_grad_norm_sq);
  out << kCsvHeader << '\n';
  for (const auto& r : record.rows)
    out << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g}\n", r.iter, r.samples, r.comm_rounds, r.grad_norm_sq,
                       r.consensus_err, r.f_value);
}

RunRecord read_csv(std::istream& in) {
  RunRecord rec;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), value = line.substr(eq + 1);
      if (key == "fingerprint") rec.fingerprint = value;
      else if (key == "algorithm") rec.algorithm = value;
      else if (key == "seed") rec.seed = std::stoull(value);
      else if (key == "truncated") rec.truncated = value == "1";
      else if (key == "output_iter") rec.output_iter = std::stoll(value);
      else if (key == "output_grad_norm_sq") rec.output_grad_norm_sq = std::stod(value);
      continue;
    }
    if (!header) {
      if (line != kCsvHeader) throw ParseError(fmt::format("csv: line {}: unexpected header '{}'", line_no, line));
      header = true;
      continue;
    }
    std::istringstream ss(line);
    MetricRow r;
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0;
    if (!(ss >> r.iter >> c1 >> r.samples >> c2 >> r.comm_rounds >> c3 >> r.grad_norm_sq >> c4 >> r.consensus_err >> c5 >>
          r.f_value) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' || c5 != ',')
      throw ParseError(fmt::format("csv: line {}: malformed row", line_no));
    rec.rows.push_back(r);
  }
  if (!header) throw ParseError("csv: missing header");
  return rec;
}

}  // namespace dopt
