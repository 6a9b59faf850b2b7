# Complexity and distance analysis module
