// Answers separation queries for the cone {y : Aᵀy ≥ 0} over stdin/stdout.
// Usage: polyhedral_oracle_server <instance-file>

#include "conic/instance.hpp"
#include "conic/oracle_solver.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: " << argv[0] << " <instance-file>\n";
    return 1;
  }
  conic::Matrix a;
  try {
    a = conic::parse_instance(conic::read_file(argv[1])).A;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  conic::PolyhedralOracle oracle(a);
  std::string line;
  while (std::getline(std::cin, line)) {
    std::istringstream in(line);
    conic::Vector v(a.rows());
    for (conic::Index i = 0; i < v.size(); ++i)
      if (!(in >> v(i))) {
        std::cerr << "malformed query\n";
        return 1;
      }
    const auto answer = oracle.query(v);
    if (!answer) {
      std::printf("YES\n");
    } else {
      for (conic::Index i = 0; i < answer->size(); ++i) std::printf(i ? " %.17g" : "%.17g", (*answer)(i));
      std::printf("\n");
    }
    std::fflush(stdout);
  }
  return 0;
}
