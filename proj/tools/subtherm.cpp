#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "subtherm/job.hpp"

using namespace subtherm;

namespace {

std::string read_all(std::istream& in) {
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_csv(const std::string& path, const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

int severity(int code) { return code == 1 ? 2 : code == 2 ? 1 : 0; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pressure bounds, Gibbs diagnostics, GL2 classification and typicality for matrix cocycles"};
  std::string job_path;
  std::string batch_path;
  std::string csv_path;
  RunOptions opt;
  opt.threads = default_threads();
  double rank_tol = 0.0;
  app.add_option("job", job_path, "job file (JSON); '-' or omitted reads standard input");
  app.add_option("--batch", batch_path, "file with a JSON array of jobs, run sequentially");
  app.add_option("--threads", opt.threads, "worker threads for word enumeration")->check(CLI::PositiveNumber);
  auto* rank = app.add_option("--rank-tol", rank_tol, "rank / eigenline tolerance")->check(CLI::PositiveNumber);
  app.add_flag("--chain-sum", opt.chain_sum, "use the summed chaining lower bound");
  app.add_flag("--allow-nonprimitive", opt.allow_nonprimitive, "downgrade the primitivity check to a warning");
  app.add_option("--csv", csv_path, "also write plot-ready CSV rows (gibbs, mixing)");
  CLI11_PARSE(app, argc, argv);
  if (*rank) opt.rank_tol = rank_tol;

  auto run_text = [&](const json& doc) {
    std::vector<std::string> warnings;
    try {
      const auto job = parse_job(doc, opt.allow_nonprimitive, &warnings);
      return run_job(job, opt, warnings);
    } catch (const Error& e) {
      return error_report(e);
    }
  };

  try {
    if (!batch_path.empty()) {
      std::ifstream in(batch_path);
      if (!in) throw std::runtime_error("cannot open " + batch_path);
      json docs;
      try {
        docs = json::parse(read_all(in));
      } catch (const json::parse_error& e) {
        const auto rep = error_report(Error(ErrorKind::SchemaError, e.what()));
        std::cout << rep.document.dump(2) << '\n';
        return 1;
      }
      if (!docs.is_array()) {
        const auto rep = error_report(Error(ErrorKind::SchemaError, "batch file must hold a JSON array of jobs"));
        std::cout << rep.document.dump(2) << '\n';
        return 1;
      }
      json out = json::array();
      int code = 0;
      std::vector<std::vector<std::string>> csv;
      for (const auto& doc : docs) {
        auto rep = run_text(doc);
        if (severity(rep.exit_code) > severity(code)) code = rep.exit_code;
        csv.insert(csv.end(), rep.csv.begin(), rep.csv.end());
        out.push_back(std::move(rep.document));
      }
      if (!csv_path.empty()) write_csv(csv_path, csv);
      std::cout << out.dump(2) << '\n';
      return code;
    }

    std::string text;
    if (job_path.empty() || job_path == "-") {
      text = read_all(std::cin);
    } else {
      std::ifstream in(job_path);
      if (!in) throw std::runtime_error("cannot open " + job_path);
      text = read_all(in);
    }
    Report rep;
    try {
      rep = run_text(json::parse(text));
    } catch (const json::parse_error& e) {
      rep = error_report(Error(ErrorKind::SchemaError, e.what()));
    }
    if (!csv_path.empty() && !rep.csv.empty()) write_csv(csv_path, rep.csv);
    std::cout << rep.document.dump(2) << '\n';
    return rep.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "subtherm: " << e.what() << '\n';
    return 1;
  }
}
