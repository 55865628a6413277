# Replica catalog
