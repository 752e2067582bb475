# DelassusBench package
