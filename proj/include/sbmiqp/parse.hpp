#ifndef SBMIQP_PARSE_HPP
#define SBMIQP_PARSE_HPP

#include <map>
#include <string>

#include "sbmiqp/model.hpp"

namespace sbmiqp {

/// Parses one expression in the infix grammar over the given variable names
/// (name -> variable index). Supported: identifiers, decimal numbers,
/// + - * / ^ (right-associative), unary minus, parentheses, and the functions
/// exp, log, sin, cos, sqrt. Throws ParseError with a column diagnostic.
Expr parse_expression(const std::string& text, const std::map<std::string, int>& vars);

/// Loads a problem from its JSON document. Throws ParseError for malformed
/// JSON or expressions and SchemaError for structural problems (missing
/// fields, unbounded integer variables, duplicate names, bad comparators).
ModelMinlp parse_problem_string(const std::string& json_text);

/// Reads the file at path and parses it. Throws ParseError when the file
/// cannot be read.
ModelMinlp parse_problem(const std::string& path);

} // namespace sbmiqp

#endif // SBMIQP_PARSE_HPP
