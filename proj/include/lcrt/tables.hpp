#pragma once

#include <string>
#include <vector>

#include "lcrt/config.hpp"

namespace lcrt {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

// number of leading columns that identify a row
int key_columns(int id);
// tolerance on the last numeric column (power or RE)
double table_tolerance(int id);

Table reproduce_table(int id);
std::string table_csv(const Table& t);
Table parse_table_csv(const std::string& text);
Table read_table_csv(const std::string& path);

struct Mismatch {
  std::string key;
  std::string column;
  std::string expected;
  std::string actual;
};

// golden rows with plateau = 1 only need power >= expected - tol
std::vector<Mismatch> diff_tables(int id, const Table& computed, const Table& golden);

// shared scenario settings for the reference tables
EconModel reference_econ();
BudgetModel reference_budget();
IccVector reference_rho(double rho0E, double rho1E);
IccBox reference_box(double r0lo, double r0hi, double r1lo, double r1hi);

}  // namespace lcrt
