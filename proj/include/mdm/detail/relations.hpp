#pragma once

#include <utility>
#include <vector>

#include "mdm/core.hpp"

namespace mdm::detail {

// Assortment-level relations induced by the data: strict edges
// (lambda[first] > lambda[second]) and forced equalities, both deduplicated.
struct AssortmentRelations {
    std::vector<std::pair<int, int>> strict;
    std::vector<std::pair<int, int>> equal; // first < second
};

AssortmentRelations extract_relations(const ChoiceDataset& data);

// Union-find over forced equalities plus the strict edges between the
// resulting classes. `cyclic` is set when a strict edge lands inside a class
// or the class digraph has a cycle, i.e. the data is not representable.
struct RelationClasses {
    std::vector<int> class_of;                    // assortment index -> class id
    int num_classes = 0;
    std::vector<std::pair<int, int>> strict;      // class-level, deduplicated, reduced
    bool cyclic = false;
    std::vector<int> topo_depth;                  // per class, longest chain below
};

RelationClasses build_classes(const ChoiceDataset& data);

} // namespace mdm::detail
