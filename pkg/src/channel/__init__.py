# Channel module
