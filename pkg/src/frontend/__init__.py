# Matched-filter front end module
