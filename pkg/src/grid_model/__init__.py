# Grid model: resources, network, estimation
