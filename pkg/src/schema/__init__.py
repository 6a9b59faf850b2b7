# Schema definitions
