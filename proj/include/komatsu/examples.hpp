#pragma once

// Built-in operators on T1 x S3 and S3 x S3.
//   t1s3_La           a = sin t + alpha,          q = 0
//   t1s3_Laq_half_i   a = sin t + alpha,          q = cos t + (sin t + alpha) h + i/2
//   t1s3_Laq_alpha_i  a = sin t + alpha,          q = cos t + (sin t + alpha) h + alpha i
//   s3s3_Lh           a = h(x1) + alpha,          q = 0
//   s3s3_Lhq          a = h(x1) + alpha,          q = p1(x1) + (h(x1) + alpha) p2(x2) + i/2

#include <string>
#include <vector>

#include "komatsu/normalform.hpp"

namespace komatsu {

struct ExampleDef {
  std::string name;
  GroupPair groups;
  Expr a;
  Expr q;
  std::string description;
};

const std::vector<std::string>& example_names();
ExampleDef example_def(const std::string& name);  // ConfigError for unknown names

// Builds the operator and checks ||X1 A - (a - a0)|| and the Q identity
// against 1e-7; ResolutionError otherwise.
OperatorSpec make_example(const std::string& name, Resolution res = {}, int convergent = 2);

}  // namespace komatsu
