#pragma once

#include <map>
#include <string>
#include <vector>

#include "evolvegen/common/word.hpp"
#include "evolvegen/graph/graph.hpp"

namespace evolvegen::compile {

// Width of the design result: the widest output, or 1 with no outputs.
unsigned result_width(const graph::ComputationGraph& g);

// Reference execution of the graph, independent of any schedule. Returns
// one entry per output ("node<id>", raw bits as seen from the top level)
// plus "result", the XOR of all outputs zero-extended to result_width.
std::map<std::string, Word> interpret(const graph::ComputationGraph& g,
                                      const std::map<std::string, Word>& inputs);

// Positional variant returning only the result.
Word interpret_result(const graph::ComputationGraph& g, const std::vector<Word>& inputs);

}  // namespace evolvegen::compile
