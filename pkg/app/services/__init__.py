# Services package: geometry, partitions, colorings, degrees, residues, constructions
