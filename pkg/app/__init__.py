# reskit: residue matrices and combinatorial degree certificates
