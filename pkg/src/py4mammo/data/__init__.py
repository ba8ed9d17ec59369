# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"Reference data shipped with the package: the phantom trajectories and case 0023-1."
